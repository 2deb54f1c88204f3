#ifndef OPLAB_TYPES_HPP
#define OPLAB_TYPES_HPP

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>

namespace oplab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct UnsupportedPair : Error {
  using Error::Error;
};
struct PreconditionViolation : Error {
  using Error::Error;
};
struct InfeasibleDecomposition : Error {
  using Error::Error;
};
struct NotAdditive : Error {
  using Error::Error;
};
struct DegeneratePsi : Error {
  using Error::Error;
};
struct NoCesaroLimit : Error {
  using Error::Error;
};
struct HorizonTooShort : Error {
  using Error::Error;
};
struct OracleNotFixed : Error {
  using Error::Error;
};
struct Unbounded : Error {
  using Error::Error;
};
struct EvaluationOverflow : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

inline void require_dim(const Vector& x, Eigen::Index d, const char* what) {
  if (x.size() != d)
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(d) + ", got " +
                            std::to_string(x.size()));
}

inline void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) throw PreconditionViolation(std::string(what) + ": non-finite entries");
}

}  // namespace oplab

#endif
