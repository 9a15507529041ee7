#include "orthodiag/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "orthodiag/errors.hpp"

namespace orthodiag {
namespace {

int parse_field(const std::string& token, const std::string& key) {
  const std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0) {
    throw ParseError("expected '" + prefix + "<int>' in header, got '" + token + "'");
  }
  const std::string digits = token.substr(prefix.size());
  char* end = nullptr;
  const long value = std::strtol(digits.c_str(), &end, 10);
  if (digits.empty() || *end != '\0' || value <= 0 || value > 1'000'000) {
    throw ParseError("invalid value in header field '" + token + "'");
  }
  return static_cast<int>(value);
}

double parse_double(std::istream& in, const char* what) {
  std::string token;
  if (!(in >> token)) throw ParseError(std::string("unexpected end of input while reading ") + what);
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (*end != '\0' || !std::isfinite(value)) {
    throw ParseError(std::string("invalid number '") + token + "' in " + what);
  }
  return value;
}

void expect_end(std::istream& in) {
  std::string extra;
  if (in >> extra) throw ParseError("trailing data after last block: '" + extra + "'");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_tensor_set(std::ostream& out, const TensorSet& set) {
  out << "symtensor v1 d=" << set.order() << " n=" << set.dim() << " m=" << set.size() << '\n';
  const std::size_t n = static_cast<std::size_t>(set.dim());
  for (const auto& t : set) {
    const auto values = t.values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      out << format_double(values[k]) << ((k + 1) % n == 0 ? '\n' : ' ');
    }
  }
}

TensorSet read_tensor_set(std::istream& in, double symmetry_tol) {
  std::string magic, version, d_tok, n_tok, m_tok;
  if (!(in >> magic >> version >> d_tok >> n_tok >> m_tok)) {
    throw ParseError("truncated symtensor header");
  }
  if (magic != "symtensor" || version != "v1") {
    throw ParseError("expected 'symtensor v1' header, got '" + magic + " " + version + "'");
  }
  const int d = parse_field(d_tok, "d");
  const int n = parse_field(n_tok, "n");
  const int m = parse_field(m_tok, "m");
  if (d < kMinOrder || d > kMaxOrder) throw ParseError("order d must be in [2, 4]");
  if (n < 2) throw ParseError("dimension n must be >= 2");

  std::size_t count = 1;
  for (int k = 0; k < d; ++k) count *= static_cast<std::size_t>(n);

  std::vector<SymTensor> tensors;
  tensors.reserve(static_cast<std::size_t>(m));
  for (int l = 0; l < m; ++l) {
    std::vector<double> values(count);
    for (auto& v : values) v = parse_double(in, "tensor block");
    try {
      tensors.push_back(SymTensor::from_values(d, n, std::move(values), symmetry_tol));
    } catch (const ContractViolation& e) {
      throw ParseError("block " + std::to_string(l) + ": " + e.what());
    }
  }
  expect_end(in);
  return TensorSet(std::move(tensors));
}

void save_tensor_set(const std::filesystem::path& path, const TensorSet& set) {
  auto out = open_out(path);
  write_tensor_set(out, set);
}

TensorSet load_tensor_set(const std::filesystem::path& path, double symmetry_tol) {
  auto in = open_in(path);
  return read_tensor_set(in, symmetry_tol);
}

void write_orthomat(std::ostream& out, const Eigen::MatrixXd& q) {
  out << "orthomat v1 n=" << q.rows() << '\n';
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
      out << format_double(q(r, c)) << (c + 1 == q.cols() ? '\n' : ' ');
    }
  }
}

Eigen::MatrixXd read_orthomat(std::istream& in) {
  std::string magic, version, n_tok;
  if (!(in >> magic >> version >> n_tok)) throw ParseError("truncated orthomat header");
  if (magic != "orthomat" || version != "v1") throw ParseError("expected 'orthomat v1' header");
  const int n = parse_field(n_tok, "n");
  Eigen::MatrixXd q(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) q(r, c) = parse_double(in, "orthomat row");
  }
  expect_end(in);
  return q;
}

void save_orthomat(const std::filesystem::path& path, const Eigen::MatrixXd& q) {
  auto out = open_out(path);
  write_orthomat(out, q);
}

Eigen::MatrixXd load_orthomat(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_orthomat(in);
}

void write_trajectory_csv(std::ostream& out, std::span<const IterationRecord> records) {
  out << kTrajectoryHeader << '\n';
  for (const auto& r : records) {
    out << r.k << ',' << r.sweep << ',' << r.i << ',' << r.j << ',' << format_double(r.theta)
        << ',' << format_double(r.f) << ',' << format_double(r.offdiag_sq) << ','
        << format_double(r.lambda_norm) << ',' << (r.skipped ? 1 : 0) << ','
        << format_double(r.wall_ms) << '\n';
  }
}

void save_trajectory_csv(const std::filesystem::path& path,
                         std::span<const IterationRecord> records) {
  auto out = open_out(path);
  write_trajectory_csv(out, records);
}

}  // namespace orthodiag
