#pragma once

#include <vector>

#include "cnls/grid.hpp"
#include "cnls/solitons.hpp"

namespace cnls {

struct ScalarInvariants {
  double energy = 0.0;
  double mass = 0.0;
  std::vector<double> momentum;
};

struct SystemInvariants {
  double total_energy = 0.0;
  std::vector<double> total_momentum;
  double mass1 = 0.0;
  double mass2 = 0.0;
  double energy1 = 0.0;
  double energy2 = 0.0;
  double coupling_overlap = 0.0;
};

/// E(u, mu) = 1/2 ||grad u||^2 - mu/4 ||u||_4^4
double energy(const Field& u, double mu);
/// M(u) = 1/2 ||u||^2
double mass(const Field& u);
/// P(u) = 1/2 Im int u grad(conj u), one entry per axis
std::vector<double> momentum(const Field& u);
ScalarInvariants scalar_invariants(const Field& u, double mu);

/// int |u1|^2 |u2|^2
double coupling_overlap(const FieldPair& p);

SystemInvariants system_invariants(const FieldPair& p, double mu1, double mu2, double beta);

/// S = E + (omega + |v|^2/4) M + v.P
double action_S(const Field& u, double mu, double omega, std::span<const double> v);

/// Sum of the per-component actions with each soliton's parameters.
double vector_action(const FieldPair& p, const SolitonFamily& family);

/// Second variation <S''(u) eps, eps>, assembled as an explicit quadratic form.
double linearized_action(const Field& base, const Field& eps, double mu, double omega,
                         std::span<const double> v);

double vector_linearized_action(const FieldPair& base, const FieldPair& eps,
                                const SolitonFamily& family);

}  // namespace cnls
