#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "robcov/types.hpp"

namespace robcov {

/// Data matrix X = [x_1, ..., x_n] (N x n) with provenance.
///
/// Real data is stored with zero imaginary parts and is_complex = false.
/// M is the dimension of the latent vectors y_i when a generator produced X
/// (x_i = A_N y_i), otherwise M = N.
struct SampleSet {
  Matrix X;
  Index M = 0;
  bool is_complex = true;
  std::string kind = "external";
  std::uint64_t seed = 0;

  Index N() const noexcept { return X.rows(); }
  Index n() const noexcept { return X.cols(); }
  double c() const noexcept { return static_cast<double>(N()) / static_cast<double>(n()); }

  static SampleSet from_matrix(Matrix X, bool is_complex = true);
  static SampleSet from_real(const RealMatrix& X);

  /// Throws DomainError if an entry is not finite.
  void check_finite() const;
};

/// CSV layout:
///   N,n,M,kind,seed
///   <N>,<n>,<M>,<kind>,<seed>
///   N data rows; each holds n values (real) or 2n interleaved re,im values (complex).
/// Values are written with round-trip precision.
void write_sample_csv(std::ostream& os, const SampleSet& s);
SampleSet read_sample_csv(std::istream& is);
void write_sample_csv_file(const std::string& path, const SampleSet& s);
SampleSet read_sample_csv_file(const std::string& path);

}  // namespace robcov
