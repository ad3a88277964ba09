#include "ksid/dictionary.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "ksid/errors.hpp"
#include "ksid/rng.hpp"

namespace ksid {

namespace {

double radial_phi(LiftFamily family, double r, double eps) {
  switch (family) {
    case LiftFamily::Polyharmonic:
      return r == 0.0 ? 0.0 : r * std::log(r);
    case LiftFamily::Gaussian: {
      const double a = eps * r;
      return std::exp(-a * a);
    }
    case LiftFamily::Multiquadric: {
      const double a = eps * r;
      return std::sqrt(1.0 + a * a);
    }
    case LiftFamily::InverseQuadratic: {
      const double a = eps * r;
      return 1.0 / (1.0 + a * a);
    }
    case LiftFamily::InverseMultiquadric: {
      const double a = eps * r;
      return 1.0 / std::sqrt(1.0 + a * a);
    }
    default:
      throw InvalidInputError("family has no radial profile");
  }
}

// Monomial count of total degree <= d in n variables: C(n + d, d).
std::size_t monomial_count(std::size_t n, std::size_t d) {
  std::size_t count = 1;
  for (std::size_t i = 1; i <= d; ++i) {
    count = count * (n + i) / i;
  }
  return count;
}

// Evaluates all monomials of total degree <= degree at x, graded order:
// degree 0, then 1, ..., with exponents of earlier variables decreasing
// first within each degree.
void emit_monomials(std::span<const double> x, std::size_t degree,
                    std::span<double> out) {
  std::size_t pos = 0;
  std::vector<std::size_t> exponents(x.size(), 0);
  // Recursive enumeration over exponent tuples of a fixed total degree.
  auto emit_degree = [&](auto&& self, std::size_t var,
                         std::size_t remaining) -> void {
    if (var + 1 == x.size()) {
      exponents[var] = remaining;
      double value = 1.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t e = 0; e < exponents[i]; ++e) value *= x[i];
      }
      out[pos++] = value;
      return;
    }
    for (std::size_t e = remaining + 1; e-- > 0;) {
      exponents[var] = e;
      self(self, var + 1, remaining - e);
    }
  };
  for (std::size_t total = 0; total <= degree; ++total) {
    emit_degree(emit_degree, 0, total);
  }
}

}  // namespace

std::string to_string(LiftFamily family) {
  switch (family) {
    case LiftFamily::IdentityOnly: return "identity_only";
    case LiftFamily::Polyharmonic: return "polyharmonic";
    case LiftFamily::Gaussian: return "gaussian";
    case LiftFamily::Multiquadric: return "multiquadric";
    case LiftFamily::InverseQuadratic: return "inverse_quadratic";
    case LiftFamily::InverseMultiquadric: return "inverse_multiquadric";
    case LiftFamily::Polynomial: return "polynomial";
  }
  throw InvalidInputError("unknown lift family");
}

LiftFamily lift_family_from_string(const std::string& name) {
  if (name == "identity_only") return LiftFamily::IdentityOnly;
  if (name == "polyharmonic") return LiftFamily::Polyharmonic;
  if (name == "gaussian") return LiftFamily::Gaussian;
  if (name == "multiquadric") return LiftFamily::Multiquadric;
  if (name == "inverse_quadratic") return LiftFamily::InverseQuadratic;
  if (name == "inverse_multiquadric") return LiftFamily::InverseMultiquadric;
  if (name == "polynomial") return LiftFamily::Polynomial;
  throw ConfigError("unknown lift family: " + name);
}

bool DictionarySpec::is_rbf() const {
  switch (family) {
    case LiftFamily::Polyharmonic:
    case LiftFamily::Gaussian:
    case LiftFamily::Multiquadric:
    case LiftFamily::InverseQuadratic:
    case LiftFamily::InverseMultiquadric:
      return true;
    default:
      return false;
  }
}

std::size_t DictionarySpec::num_functions() const {
  if (family == LiftFamily::IdentityOnly) return 0;
  if (family == LiftFamily::Polynomial) {
    return monomial_count(state_dim, polynomial_degree);
  }
  return centers.rows();
}

void DictionarySpec::validate() const {
  if (state_dim == 0) throw InvalidInputError("dictionary state_dim must be >= 1");
  if (is_rbf()) {
    if (centers.cols() != state_dim && centers.rows() > 0) {
      throw ShapeError("dictionary centers dimension does not match state_dim");
    }
    for (std::size_t i = 0; i < centers.rows(); ++i) {
      for (std::size_t j = 0; j < centers.cols(); ++j) {
        if (centers(i, j) < center_low || centers(i, j) > center_high) {
          throw InvalidInputError("dictionary center outside declared bounds");
        }
      }
    }
    if (!(shape_parameter > 0.0)) {
      throw InvalidInputError("shape_parameter must be positive");
    }
  }
}

Matrix sample_centers(std::size_t n_centers, std::size_t state_dim, double low,
                      double high, std::uint64_t seed) {
  if (!(low < high)) {
    throw InvalidInputError("center bounds must satisfy low < high");
  }
  if (state_dim == 0) throw InvalidInputError("state_dim must be >= 1");
  Rng rng(seed);
  Matrix centers(n_centers, state_dim);
  for (std::size_t i = 0; i < n_centers; ++i) {
    for (std::size_t j = 0; j < state_dim; ++j) {
      centers(i, j) = rng.uniform(low, high);
    }
  }
  return centers;
}

DictionarySpec make_identity_dictionary(std::size_t state_dim) {
  DictionarySpec spec;
  spec.family = LiftFamily::IdentityOnly;
  spec.state_dim = state_dim;
  spec.validate();
  return spec;
}

DictionarySpec make_rbf_dictionary(LiftFamily family, std::size_t n_centers,
                                   std::size_t state_dim, double low,
                                   double high, std::uint64_t seed,
                                   double shape_parameter) {
  DictionarySpec spec;
  spec.family = family;
  spec.state_dim = state_dim;
  spec.center_low = low;
  spec.center_high = high;
  spec.seed = seed;
  spec.shape_parameter = shape_parameter;
  spec.centers = sample_centers(n_centers, state_dim, low, high, seed);
  spec.validate();
  return spec;
}

DictionarySpec make_polynomial_dictionary(std::size_t state_dim,
                                          std::size_t degree) {
  DictionarySpec spec;
  spec.family = LiftFamily::Polynomial;
  spec.state_dim = state_dim;
  spec.polynomial_degree = degree;
  spec.validate();
  return spec;
}

void lift_into(const DictionarySpec& spec, std::span<const double> x,
               std::span<double> out) {
  if (x.size() != spec.state_dim) {
    throw ShapeError("lift: state vector has dimension " +
                     std::to_string(x.size()) + ", dictionary expects " +
                     std::to_string(spec.state_dim));
  }
  if (out.size() != spec.lifted_dim()) {
    throw ShapeError("lift: output span has wrong dimension");
  }
  // State block is copied verbatim (bit-identical).
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];

  if (spec.family == LiftFamily::IdentityOnly) return;
  if (spec.family == LiftFamily::Polynomial) {
    emit_monomials(x, spec.polynomial_degree, out.subspan(x.size()));
    return;
  }
  const std::size_t n_centers = spec.centers.rows();
  for (std::size_t i = 0; i < n_centers; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < spec.state_dim; ++j) {
      const double d = x[j] - spec.centers(i, j);
      sq += d * d;
    }
    out[x.size() + i] = radial_phi(spec.family, std::sqrt(sq),
                                   spec.shape_parameter);
  }
}

std::vector<double> lift(const DictionarySpec& spec,
                         std::span<const double> x) {
  std::vector<double> out(spec.lifted_dim());
  lift_into(spec, x, out);
  return out;
}

namespace {

void lift_column(const DictionarySpec& spec, const Matrix& states,
                 Matrix& lifted, std::vector<double>& x_buf,
                 std::vector<double>& z_buf, std::size_t j) {
  for (std::size_t i = 0; i < states.rows(); ++i) x_buf[i] = states(i, j);
  lift_into(spec, x_buf, z_buf);
  for (std::size_t i = 0; i < z_buf.size(); ++i) lifted(i, j) = z_buf[i];
}

}  // namespace

Matrix lift_batch(const DictionarySpec& spec, const Matrix& states) {
  if (states.rows() != spec.state_dim) {
    throw ShapeError("lift_batch: states must have state_dim rows");
  }
  states.require_finite("lift_batch states");
  Matrix lifted(spec.lifted_dim(), states.cols());
  const std::int64_t n = static_cast<std::int64_t>(states.cols());
#pragma omp parallel
  {
    std::vector<double> x_buf(spec.state_dim);
    std::vector<double> z_buf(spec.lifted_dim());
#pragma omp for schedule(static)
    for (std::int64_t j = 0; j < n; ++j) {
      lift_column(spec, states, lifted, x_buf, z_buf,
                  static_cast<std::size_t>(j));
    }
  }
  return lifted;
}

Matrix lift_batch_serial(const DictionarySpec& spec, const Matrix& states) {
  if (states.rows() != spec.state_dim) {
    throw ShapeError("lift_batch: states must have state_dim rows");
  }
  states.require_finite("lift_batch states");
  Matrix lifted(spec.lifted_dim(), states.cols());
  std::vector<double> x_buf(spec.state_dim);
  std::vector<double> z_buf(spec.lifted_dim());
  for (std::size_t j = 0; j < states.cols(); ++j) {
    lift_column(spec, states, lifted, x_buf, z_buf, j);
  }
  return lifted;
}

}  // namespace ksid
