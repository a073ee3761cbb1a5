#ifndef FLOWSPEC_ERROR_HPP
#define FLOWSPEC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace flowspec {

// Base for every error the library raises. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Shape or size precondition violated (matmul mismatch, q out of range, ...).
class DimensionError : public Error {
  public:
    using Error::Error;
};

// Iterative factorization ran out of sweeps.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string &what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

// Input data is unusable (asymmetric, zero row sum, identical points, ...).
class DataError : public Error {
  public:
    using Error::Error;
};

// Reading or writing a file failed.
class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace flowspec

#endif // FLOWSPEC_ERROR_HPP
