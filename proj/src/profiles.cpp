#include "cnls/profiles.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "cnls/error.hpp"
#include "cnls/field_io.hpp"
#include "cnls/spectral.hpp"

namespace cnls {

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::closed_form_1d: return "closed_form_1d";
    case ProfileKind::petviashvili: return "petviashvili";
    case ProfileKind::external: return "external";
  }
  return "external";
}

ProfileKind profile_kind_from_string(const std::string& s) {
  if (s == "closed_form_1d") return ProfileKind::closed_form_1d;
  if (s == "petviashvili") return ProfileKind::petviashvili;
  if (s == "external") return ProfileKind::external;
  throw Error(ErrorKind::config, "unknown profile kind '" + s + "'");
}

double residual(const Field& phi) {
  Field lap = laplacian(phi);
  double r = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const cplx u = phi[i];
    r = std::max(r, std::abs(-lap[i] + u - std::norm(u) * u));
  }
  return r;
}

Profile ground_state_1d(const GridPtr& grid) {
  require(grid->dim() == 1, "closed-form ground state is one-dimensional");
  const double half = 0.5 * grid->length(0);
  require(std::sqrt(2.0) / std::cosh(half) < kTailTolerance * std::sqrt(2.0),
          "box too small for the sech profile: tail above tolerance at the boundary");
  Field f = Field::from_function(grid, [](const std::array<double, 3>& x) {
    return cplx{std::sqrt(2.0) / std::cosh(x[0]), 0.0};
  });
  Profile p{std::move(f), 0.0, ProfileKind::closed_form_1d, 0.0};
  p.residual = residual(p.field);
  return p;
}

Profile petviashvili(const GridPtr& grid, const PetviashviliOptions& opts,
                     std::vector<double>* trace) {
  require(opts.tol > 0.0, "petviashvili: tolerance must be positive");
  require(opts.max_iter >= 1, "petviashvili: need at least one iteration");

  Field phi = opts.initial_guess
                  ? *opts.initial_guess
                  : Field::from_function(grid, [](const std::array<double, 3>& x) {
                      return cplx{2.0 * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])), 0.0};
                    });
  require(*phi.grid_ptr() == *grid, "petviashvili: initial guess lives on another grid");

  const auto& k2 = grid->k_squared();
  auto coeffs = spectrum(phi);

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    std::vector<cplx> cubic(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) cubic[i] = std::norm(phi[i]) * phi[i];
    fft_forward(*grid, cubic);

    // Stabilizing factor: ratio of the two sides of the fixed-point equation
    // tested against the current iterate.
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      lhs += (1.0 + k2[i]) * std::norm(coeffs[i]);
      rhs += (cubic[i] * std::conj(coeffs[i])).real();
    }
    require(rhs > 0.0 && std::isfinite(lhs), "petviashvili: iteration collapsed", ErrorKind::solver);
    const double factor = std::pow(lhs / rhs, opts.gamma_exponent);

    std::vector<cplx> next(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) next[i] = factor * cubic[i] / (1.0 + k2[i]);
    coeffs = next;
    Field updated = from_spectrum(grid, std::move(next));

    double dist = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) dist = std::max(dist, std::abs(updated[i] - phi[i]));
    phi = std::move(updated);
    if (trace) trace->push_back(dist);

    require(norm_l2(phi) > 1e-8, "petviashvili: iterate collapsed to zero", ErrorKind::solver);
    require(phi.all_finite(), "petviashvili: non-finite iterate", ErrorKind::solver);
    if (dist < opts.tol) {
      Profile p{std::move(phi), 0.0, ProfileKind::petviashvili, opts.tol};
      p.residual = residual(p.field);
      return p;
    }
  }
  throw Error(ErrorKind::solver, "petviashvili: no convergence within " +
                                     std::to_string(opts.max_iter) + " iterations");
}

double decay_constant(const Profile& p, double eta) {
  require(eta > 0.0 && eta < 1.0, "decay rate eta must lie in (0,1)");
  const Field& phi = p.field;
  const auto grad = spectral_gradient(phi);
  std::vector<double> envelope(phi.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    double g2 = 0.0;
    for (const auto& d : grad) g2 += std::norm(d[i]);
    envelope[i] = std::abs(phi[i]) + std::sqrt(g2);
    peak = std::max(peak, envelope[i]);
  }
  // Samples at roundoff level carry no decay information; they would only
  // amplify noise by exp(eta |x|).
  const double floor = 1e-12 * peak;
  double c = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (envelope[i] < floor) continue;
    const auto x = phi.grid().point(i);
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    c = std::max(c, envelope[i] * std::exp(eta * r));
  }
  return c;
}

void write_profile(const std::filesystem::path& bin_path, const Profile& p) {
  write_field(bin_path, p.field);
  nlohmann::json side = {{"kind", to_string(p.kind)},
                         {"residual", p.residual},
                         {"tolerance", p.tolerance}};
  auto side_path = bin_path;
  side_path.replace_extension(".json");
  std::ofstream out(side_path);
  require(static_cast<bool>(out), "cannot write sidecar " + side_path.string(), ErrorKind::io);
  out << side.dump(2) << '\n';
}

Profile read_profile(const std::filesystem::path& bin_path) {
  Profile p{read_field(bin_path), 0.0, ProfileKind::external, 0.0};
  auto side_path = bin_path;
  side_path.replace_extension(".json");
  std::ifstream in(side_path);
  if (in) {
    try {
      const auto side = nlohmann::json::parse(in);
      p.kind = profile_kind_from_string(side.at("kind").get<std::string>());
      p.tolerance = side.value("tolerance", 0.0);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::io, "bad profile sidecar " + side_path.string() + ": " + e.what());
    }
  }
  p.residual = residual(p.field);
  return p;
}

}  // namespace cnls
