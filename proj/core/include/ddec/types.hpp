#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddec {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An evaluated delay came out negative: the state has left the model's
// validity region. Carries the delay index and the offending value.
class NegativeDelayError : public std::runtime_error {
 public:
  NegativeDelayError(int delay_index, double value, double where = 0.0)
      : std::runtime_error("delay " + std::to_string(delay_index) +
                           " evaluated negative (" + std::to_string(value) +
                           ") at " + std::to_string(where)),
        index(delay_index), value(value), location(where) {}
  int index;
  double value;
  double location;  // time t or rescaled time s, depending on caller
};

class NoConvergenceError : public std::runtime_error {
 public:
  explicit NoConvergenceError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_norm(residual) {}
  double residual_norm;
};

class SingularJacobianError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DelayBelowStepError : public std::runtime_error {
 public:
  DelayBelowStepError(double t, double tau, double h)
      : std::runtime_error("delay " + std::to_string(tau) + " below step " +
                           std::to_string(h) + " at t=" + std::to_string(t) +
                           "; shrink the step size"),
        t(t), tau(tau), h(h) {}
  double t, tau, h;
};

}  // namespace ddec
