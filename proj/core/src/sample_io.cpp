#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "robcov/errors.hpp"
#include "robcov/sample_set.hpp"
#include "robcov/text_format.hpp"

namespace robcov {

SampleSet SampleSet::from_matrix(Matrix X, bool is_complex) {
  SampleSet s;
  s.M = X.rows();
  s.X = std::move(X);
  s.is_complex = is_complex;
  return s;
}

SampleSet SampleSet::from_real(const RealMatrix& X) {
  return from_matrix(X.cast<Complex>(), false);
}

void SampleSet::check_finite() const {
  if (!X.allFinite()) throw DomainError("sample set contains non-finite entries");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(field);
  }
  return fields;
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw IoError("sample csv: bad number '" + text + "'");
  return v;
}

long long parse_integer(const std::string& text) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("sample csv: bad integer '" + text + "'");
  }
  return v;
}

}  // namespace

void write_sample_csv(std::ostream& os, const SampleSet& s) {
  os << "N,n,M,kind,seed\n";
  os << s.N() << ',' << s.n() << ',' << s.M << ',' << (s.is_complex ? "complex" : "real") << ','
     << s.seed << '\n';
  for (Index r = 0; r < s.N(); ++r) {
    for (Index c = 0; c < s.n(); ++c) {
      if (c > 0) os << ',';
      os << format_double(s.X(r, c).real());
      if (s.is_complex) os << ',' << format_double(s.X(r, c).imag());
    }
    os << '\n';
  }
}

SampleSet read_sample_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("sample csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "N,n,M,kind,seed") throw IoError("sample csv: unexpected header '" + line + "'");
  if (!std::getline(is, line)) throw IoError("sample csv: missing metadata row");
  const auto meta = split_csv_line(line);
  if (meta.size() != 5) throw IoError("sample csv: metadata row needs 5 fields");

  const long long N = parse_integer(meta[0]);
  const long long n = parse_integer(meta[1]);
  const long long M = parse_integer(meta[2]);
  const std::string& kind = meta[3];
  if (N < 1 || n < 1) throw IoError("sample csv: N and n must be positive");
  if (kind != "complex" && kind != "real") throw IoError("sample csv: kind must be real or complex");
  const bool is_complex = kind == "complex";

  SampleSet s;
  s.X.resize(N, n);
  s.M = M;
  s.is_complex = is_complex;
  s.kind = "file";
  s.seed = static_cast<std::uint64_t>(parse_integer(meta[4]));

  const long long width = is_complex ? 2 * n : n;
  for (long long r = 0; r < N; ++r) {
    if (!std::getline(is, line)) throw IoError("sample csv: fewer data rows than N");
    const auto fields = split_csv_line(line);
    if (static_cast<long long>(fields.size()) != width) {
      throw IoError("sample csv: row " + std::to_string(r) + " has " +
                    std::to_string(fields.size()) + " fields, expected " + std::to_string(width));
    }
    for (long long c = 0; c < n; ++c) {
      const double re = parse_double(fields[static_cast<std::size_t>(is_complex ? 2 * c : c)]);
      const double im = is_complex ? parse_double(fields[static_cast<std::size_t>(2 * c + 1)]) : 0.0;
      s.X(r, c) = Complex(re, im);
    }
  }
  s.check_finite();
  return s;
}

void write_sample_csv_file(const std::string& path, const SampleSet& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_sample_csv(os, s);
  if (!os) throw IoError("write to '" + path + "' failed");
}

SampleSet read_sample_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_sample_csv(is);
}

}  // namespace robcov
