// Times the OpenMP kernels against their serial references and checks that
// both produce the same result. Usage: bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "idips/evaluator.hpp"
#include "idips/kernels.hpp"
#include "idips/param_solver.hpp"
#include "idips/sim.hpp"
#include "idips/syntax.hpp"

using namespace idips;

namespace {

double seconds(const std::function<void()>& fn, int repeats) {
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

void report(const char* name, double par, double ser, bool same) {
  std::printf("%-8s parallel %9.3f ms  serial %9.3f ms  speedup %5.2fx  %s\n", name, par * 1e3, ser * 1e3,
              ser / par, same ? "identical" : "MISMATCH");
}

WorldState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-6, 6);
  WorldState w;
  for (const auto& in : social_domain().inputs) w.set(in.name, {u(rng), in.type.is_vector() ? u(rng) : 0.0});
  return w;
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  std::printf("threads: %d\n", omp_get_max_threads());
  std::mt19937_64 rng(1);
  bool ok = true;

  {
    // The serial reference is the quadratic direct definition.
    const size_t n = 2000, cols = 100;
    std::normal_distribution<double> g(0, 2);
    std::vector<std::vector<double>> data(cols, std::vector<double>(n));
    for (auto& c : data) {
      for (auto& x : c) x = g(rng);
    }
    std::vector<const std::vector<double>*> ptrs;
    for (const auto& c : data) ptrs.push_back(&c);
    FeatureTable table = build_feature_table(ptrs, n);
    std::vector<SweepRole> roles(n);
    for (auto& r : roles) r.want = static_cast<int8_t>(rng() % 2 ? 1 : -1);
    std::vector<LiteralChoice> a, b;
    double par = seconds([&] { a = sweep_literals(table, roles); }, repeats);
    double ser = seconds([&] { b = sweep_literals_serial(table, roles); }, 1);
    bool same = a.size() == b.size();
    for (size_t i = 0; same && i < a.size(); ++i) same = a[i].theta == b[i].theta && a[i].satisfied == b[i].satisfied;
    report("sweep", par, ser, same);
    ok = ok && same;
  }

  {
    const auto& dom = social_domain();
    auto p = parse_predicate(
        "norm(p_h) < a [1,0,0] = 2 && (dist(p_h, p_hl) > b [1,0,0] = 1 || freePathLength(p_g) < c [1,0,0] = 3)", dom);
    std::vector<WorldState> pos, neg;
    for (int i = 0; i < 20000; ++i) (i % 3 ? neg : pos).push_back(random_state(rng));
    double x = 0, y = 0;
    double par = seconds([&] { x = score(*p, "GoAlone", pos, neg); }, repeats);
    double ser = seconds([&] { y = score_serial(*p, "GoAlone", pos, neg); }, repeats);
    report("score", par, ser, x == y);
    ok = ok && x == y;
  }

  {
    SolveInstance inst;
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 3; ++i) inst.params.push_back({"p" + std::to_string(i), kLength, u(rng)});
    for (int i = 0; i < 16; ++i) {
      auto leaf = [&] { return Residual::leaf(u(rng), rng() % 2 ? Rel::Gt : Rel::Lt, "p" + std::to_string(rng() % 3)); };
      inst.constraints.push_back({{Residual::conj(leaf(), Residual::disj(leaf(), leaf())), rng() % 2 == 0}, 1.0});
    }
    SolveResult a, b;
    double par = seconds([&] { a = srtr_optimize(inst); }, repeats);
    double ser = seconds([&] { b = srtr_optimize_serial(inst); }, 1);
    report("solver", par, ser, a.assignment == b.assignment);
    ok = ok && a.assignment == b.assignment;
  }

  {
    std::vector<Scenario> sc{load_scenario(std::string(IDIPS_DATA_DIR) + "/scenarios/crowd.json")};
    std::vector<NamedPolicy> pol{{"greedy", load_policy(std::string(IDIPS_DATA_DIR) + "/policies/greedy_teacher.asp",
                                                        social_domain())}};
    std::vector<uint64_t> seeds;
    for (uint64_t s = 0; s < 16; ++s) seeds.push_back(s);
    std::string a, b;
    double par = seconds([&] { a = metrics_csv(run_suite(sc, pol, seeds)); }, 1);
    double ser = seconds([&] { b = metrics_csv(run_suite_serial(sc, pol, seeds)); }, 1);
    report("suite", par, ser, a == b);
    ok = ok && a == b;
  }
  return ok ? 0 : 1;
}
