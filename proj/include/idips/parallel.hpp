#pragma once

#include <exception>
#include <mutex>

namespace idips {

// Collects the first exception thrown inside an OpenMP loop body so it can be
// rethrown on the calling thread after the region ends.
class ParallelErrors {
 public:
  template <typename F>
  void run(F&& body) {
    try {
      body();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (!first_) first_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr first_;
};

}  // namespace idips
