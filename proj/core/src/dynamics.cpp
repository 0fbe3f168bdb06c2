#include "flownet/dynamics.hpp"

#include <stdexcept>
#include <string>

namespace flownet {

Hamiltonian::Hamiltonian(int dim, bool weighted, Eigen::VectorXd weights)
    : dim_(dim), weighted_(weighted), weights_(std::move(weights)) {}

Hamiltonian Hamiltonian::quadratic(int dim) {
  if (dim <= 0) throw std::invalid_argument("hamiltonian: dimension must be positive");
  return Hamiltonian(dim, false, Eigen::VectorXd());
}

Hamiltonian Hamiltonian::weighted(Eigen::VectorXd weights) {
  if (weights.size() == 0) throw std::invalid_argument("hamiltonian.weights: must be nonempty");
  for (int i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) {
      throw std::invalid_argument("hamiltonian.weights[" + std::to_string(i) +
                                  "]: must be strictly positive");
    }
  }
  const int dim = static_cast<int>(weights.size());
  return Hamiltonian(dim, true, std::move(weights));
}

double Hamiltonian::value(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw std::invalid_argument("hamiltonian: state dimension mismatch");
  if (!weighted_) return 0.5 * x.squaredNorm();
  return 0.5 * x.cwiseProduct(weights_).dot(x);
}

Eigen::VectorXd Hamiltonian::gradient(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw std::invalid_argument("hamiltonian: state dimension mismatch");
  if (!weighted_) return x;
  return weights_.cwiseProduct(x);
}

Eigen::VectorXd Hamiltonian::hessian_diagonal() const {
  if (!weighted_) return Eigen::VectorXd::Ones(dim_);
  return weights_;
}

void DisturbanceModel::validate(int vertex_count) const {
  if (terminals.rows() != vertex_count) {
    throw std::invalid_argument("disturbance.E: row count must match vertex count");
  }
  if (rates.size() != terminals.cols()) {
    throw std::invalid_argument("disturbance.d: one rate per terminal column required");
  }
  for (int j = 0; j < terminals.cols(); ++j) {
    int nonzero = 0;
    for (int i = 0; i < terminals.rows(); ++i) {
      const double v = terminals(i, j);
      if (v == 0.0) continue;
      if (v != 1.0 && v != -1.0) {
        throw std::invalid_argument("disturbance.E[" + std::to_string(i) + "][" +
                                    std::to_string(j) + "]: entries must be -1, 0 or 1");
      }
      ++nonzero;
    }
    if (nonzero != 1) {
      throw std::invalid_argument("disturbance.E column " + std::to_string(j) +
                                  ": exactly one nonzero entry required");
    }
  }
}

void ControllerSpec::validate(int edge_count) const {
  if (kind == Kind::SaturatedPI) {
    if (gains.size() != 0) {
      throw std::invalid_argument("controller.gains: saturated PI uses unit gains");
    }
    return;
  }
  if (gains.size() != edge_count) {
    throw std::invalid_argument("controller.gains: one gain per edge required");
  }
  for (int i = 0; i < gains.size(); ++i) {
    if (!(gains[i] > 0.0)) {
      throw std::invalid_argument("controller.gains[" + std::to_string(i) +
                                  "]: must be strictly positive");
    }
  }
}

namespace {

void check_same_size(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const char* what) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

Eigen::VectorXd saturate(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper) {
  check_same_size(x, lower, "saturate");
  check_same_size(x, upper, "saturate");
  Eigen::VectorXd out(x.size());
  for (int i = 0; i < x.size(); ++i) {
    out[i] = x[i] <= lower[i] ? lower[i] : (x[i] >= upper[i] ? upper[i] : x[i]);
  }
  return out;
}

Eigen::VectorXd saturation_integral(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper) {
  check_same_size(x, lower, "saturation_integral");
  check_same_size(x, upper, "saturation_integral");
  Eigen::VectorXd out(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double a = lower[i];
    const double b = upper[i];
    if (x[i] > b) {
      out[i] = 0.5 * b * b + b * (x[i] - b);
    } else if (x[i] < a) {
      out[i] = 0.5 * a * a + a * (x[i] - a);
    } else {
      out[i] = 0.5 * x[i] * x[i];
    }
  }
  return out;
}

FlowRates rhs_proportional(const Eigen::MatrixXd& incidence, const Hamiltonian& h,
                           const Eigen::VectorXd& gains, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& injection) {
  FlowRates rates;
  rates.flow = -gains.cwiseProduct(incidence.transpose() * h.gradient(x));
  rates.x_dot = incidence * rates.flow + injection;
  rates.xc_dot = Eigen::VectorXd();
  return rates;
}

FlowRates rhs_pi(const Eigen::MatrixXd& incidence, const Hamiltonian& h,
                 const Eigen::VectorXd& gains, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& xc, const Eigen::VectorXd& injection) {
  FlowRates rates;
  const Eigen::VectorXd y = incidence.transpose() * h.gradient(x);
  rates.flow = -gains.cwiseProduct(y) - xc;
  rates.x_dot = incidence * rates.flow + injection;
  rates.xc_dot = y;
  return rates;
}

FlowRates rhs_pi_saturated(const Eigen::MatrixXd& incidence, const Hamiltonian& h,
                           const FlowConstraints& constraints, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& xc, const Eigen::VectorXd& injection) {
  FlowRates rates;
  const Eigen::VectorXd y = incidence.transpose() * h.gradient(x);
  rates.flow = saturate(-y - xc, constraints.lower, constraints.upper);
  rates.x_dot = incidence * rates.flow + injection;
  rates.xc_dot = y;
  return rates;
}

}  // namespace flownet
