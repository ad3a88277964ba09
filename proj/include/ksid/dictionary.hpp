// Lifting-function dictionaries: maps a normalized state vector x to the
// lifted observable vector psi(x) = [x; phi_1(x); ...]. The state always
// occupies the first n components verbatim.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ksid/matrix.hpp"

namespace ksid {

enum class LiftFamily {
  IdentityOnly,
  Polyharmonic,   // phi(r) = r * ln(r), phi(0) := 0
  Gaussian,       // phi(r) = exp(-(eps*r)^2)
  Multiquadric,   // phi(r) = sqrt(1 + (eps*r)^2)
  InverseQuadratic,      // phi(r) = 1 / (1 + (eps*r)^2)
  InverseMultiquadric,   // phi(r) = 1 / sqrt(1 + (eps*r)^2)
  Polynomial,     // monomials of total degree <= polynomial_degree
};

std::string to_string(LiftFamily family);
LiftFamily lift_family_from_string(const std::string& name);

struct DictionarySpec {
  LiftFamily family = LiftFamily::IdentityOnly;
  std::size_t state_dim = 0;
  Matrix centers;  // one center per row, state_dim columns (RBF families)
  double shape_parameter = 1.0;      // eps, parametric RBF families only
  std::size_t polynomial_degree = 0;  // Polynomial family only
  double center_low = -1.8;
  double center_high = 1.8;
  std::uint64_t seed = 0;

  bool is_rbf() const;
  // Number of lifting functions beyond the state block.
  std::size_t num_functions() const;
  std::size_t lifted_dim() const { return state_dim + num_functions(); }

  void validate() const;
};

// Draws n_centers i.i.d. uniform vectors on [low, high]^state_dim, one per
// row. The stream is bit-reproducible for a fixed seed (mt19937_64 with a
// 53-bit mantissa mapping, components drawn center-major). Drawing k centers
// yields a prefix of the rows drawn for any k' > k with the same seed.
Matrix sample_centers(std::size_t n_centers, std::size_t state_dim, double low,
                      double high, std::uint64_t seed);

DictionarySpec make_identity_dictionary(std::size_t state_dim);
DictionarySpec make_rbf_dictionary(LiftFamily family, std::size_t n_centers,
                                   std::size_t state_dim, double low,
                                   double high, std::uint64_t seed,
                                   double shape_parameter = 1.0);
DictionarySpec make_polynomial_dictionary(std::size_t state_dim,
                                          std::size_t degree);

std::vector<double> lift(const DictionarySpec& spec, std::span<const double> x);
void lift_into(const DictionarySpec& spec, std::span<const double> x,
               std::span<double> out);

// Column j of the result is lift(states column j). Parallel over columns;
// bit-identical to lift_batch_serial for any thread count.
Matrix lift_batch(const DictionarySpec& spec, const Matrix& states);
Matrix lift_batch_serial(const DictionarySpec& spec, const Matrix& states);

}  // namespace ksid
