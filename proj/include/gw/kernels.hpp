// Poisson kernel, its gradient, the ψ generators and the positive kernels
// used by the off-diagonal estimates.
#pragma once

#include "gw/dyadic.hpp"
#include "gw/lattice.hpp"

namespace gw {

/// Γ((n+1)/2) / π^{(n+1)/2}, so that ∫ P_t = 1.
double poisson_normalization(int dim);

double poisson(const Point& x, double t, int dim);
double dt_poisson(const Point& x, double t, int dim);
/// (∂_t P_t, ∂_{x_1} P_t, …, ∂_{x_n} P_t); entries past dim+1 are zero.
std::array<double, 3> grad_poisson(const Point& x, double t, int dim);

/// Generator index: 0 is ∂_t P_t at t = 1, i in 1..n is ∂_{x_i} P_1.
/// These satisfy t ∇P_t(x) = ψ_t(x) componentwise.
double psi(int generator, const Point& x, int dim);
/// ψ_t(y) = t^{-n} ψ(y/t).
double psi_t(int generator, const Point& y, double t, int dim);

/// Atoms farther than this many base-cube sides are dropped from
/// convolutions.
inline constexpr double kCutoffSides = 1000.0;

/// ψ_t * μ(x) by direct summation over the atoms of μ.
double psi_t_convolve(const SignedAtoms& mu, int generator, const Point& x, double t, int dim, double side);
double psi_t_convolve(const Weight& fw, int generator, const Point& x, double t);

struct U11Constants {
  double c_decay = 0.0;
  double c_smooth = 0.0;
  double cancel_residual = 0.0;
};

/// Empirical constants for the three U_{1,1} conditions over |x| <= 10^3.
U11Constants u11_check(int generator, int dim);

/// P(K, μ) = Σ l(K) / (l(K) + dist(y, K))^{n+1} μ(y).
double poisson_avg(const DyadicCube& k, const Weight& mu);
double poisson_avg(const DyadicCube& k, const SignedAtoms& mu, const LatticeSpec& spec);

/// A_r^σ f(x) = r^{-n} Σ_{y ∈ Q(x,r)} f(y) σ(y), Q(x, r) half-open.
double avg_operator(const GridFunction& f, const Weight& sigma, double r, const Point& x);

/// K_{α,t}(x, y) = t^α / (t + |x-y|)^{n+α}.
double k_alpha(const Point& x, const Point& y, double alpha, double t, int dim);
double i_alpha(const GridFunction& f, const Weight& sigma, double alpha, double t, const Point& x);

}  // namespace gw
