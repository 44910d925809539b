#pragma once

#include <exception>

namespace sslab::detail {

// Exceptions must not escape an OpenMP region; the first one is kept and
// rethrown after the loop with its dynamic type intact.
class ExceptionSlot {
 public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(sslab_exception_slot)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace sslab::detail
