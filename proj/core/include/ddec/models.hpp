#pragma once

#include <string>
#include <vector>

#include "ddec/model.hpp"

namespace ddec {

// Inverted pendulum with delayed PD feedback; p = (a, b, tau), R = -I.
DdeSystem make_pendulum();

// Delayed-feedback ENSO model driven by an autonomous forcing oscillator.
// p = (b, c, kappa, taubar, eta_c, eta_e); tau1 = taubar,
// tau2 = taubar + eta_c h(t) + eta_e h(t - taubar). With eta_c = eta_e = 0
// the second channel is constant and the model is the constant-delay form.
DdeSystem make_enso(double eta_c = 0.0, double eta_e = 0.0);

// Scalar DDE with two state-dependent delays tau_j = a_j + c_j u(t);
// p = (gamma, kappa1, kappa2, a1, a2, c1, c2).
DdeSystem make_two_delay();

// Spherical chart around the pendulum triple-zero point (a*, b*, tau*).
struct EllipsoidChart {
  double a_star = 1.0;
  double b_star = std::sqrt(2.0);
  double tau_star = std::sqrt(2.0);
  double r = 0.5;
};

// (phi, psi) in [0,1]^2 -> (a, b, tau) on the chart surface.
Vec ellipsoid_to_params(const EllipsoidChart& chart, double phi, double psi);

// Pendulum reparametrized by p = (phi, psi, r) on the chart surface; the
// physical (a, b, tau) are derived inside the callbacks.
DdeSystem make_pendulum_on_ellipsoid();

// name in {pendulum, enso, enso_sd, two_delay, pendulum_ellipsoid}.
DdeSystem model_registry(const std::string& name);

std::vector<std::string> model_names();

}  // namespace ddec
