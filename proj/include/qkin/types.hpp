#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qkin {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Internal units: hbar = m = k_B = 1, box length 1.
inline constexpr double kHbar = 1.0;
inline constexpr double kMass = 1.0;

/// Raised when an input violates a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot produce a trustworthy answer
/// (singular query, non-convergence, ill-conditioning).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense rank-4 tensor over F modes, indexed as t(a, b, c, d) in the
/// order the pair coefficients are written: V_{l1 l2 f2 f1}.
template <typename Scalar>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int modes) : n_(modes), data_(std::size_t(modes) * modes * modes * modes, Scalar(0)) {}

  int modes() const { return n_; }

  Scalar& operator()(int a, int b, int c, int d) { return data_[index(a, b, c, d)]; }
  const Scalar& operator()(int a, int b, int c, int d) const { return data_[index(a, b, c, d)]; }

  std::vector<Scalar>& data() { return data_; }
  const std::vector<Scalar>& data() const { return data_; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  Tensor4& operator*=(Scalar s) {
    for (auto& x : data_) x *= s;
    return *this;
  }
  friend Tensor4 operator*(Scalar s, Tensor4 t) { return t *= s; }
  Tensor4& operator+=(const Tensor4& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
  friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a += Scalar(-1) * b; }

 private:
  std::size_t index(int a, int b, int c, int d) const {
    return ((std::size_t(a) * n_ + b) * n_ + c) * n_ + d;
  }
  int n_ = 0;
  std::vector<Scalar> data_;
};

using CTensor4 = Tensor4<Complex>;

template <typename Derived>
auto commutator(const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<Derived>& b) {
  return (a * b - b * a).eval();
}

template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

template <typename DA, typename DB>
double frobenius_distance(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  return (a - b).norm();
}

}  // namespace qkin
