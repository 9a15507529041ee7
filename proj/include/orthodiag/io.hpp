#pragma once

// Text formats.
//
//   symtensor v1 d=<d> n=<n> m=<m>
//   <m blocks of n^d floats, row-major>
//
//   orthomat v1 n=<n>
//   <n rows of n floats>
//
// Trajectory CSV header:
//   k,sweep,i,j,theta,f,offdiag_sq,lambda_norm,skipped,wall_ms
//
// Writers emit 17 significant digits so values round-trip exactly.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "orthodiag/algorithms.hpp"
#include "orthodiag/symtensor.hpp"

namespace orthodiag {

/// "%.17g" formatting.
std::string format_double(double value);

void write_tensor_set(std::ostream& out, const TensorSet& set);
/// Validates symmetry of each block within `symmetry_tol * ||T||` and
/// symmetrizes it.  Throws ParseError on malformed or asymmetric input.
TensorSet read_tensor_set(std::istream& in, double symmetry_tol = 1e-9);

void save_tensor_set(const std::filesystem::path& path, const TensorSet& set);
TensorSet load_tensor_set(const std::filesystem::path& path, double symmetry_tol = 1e-9);

void write_orthomat(std::ostream& out, const Eigen::MatrixXd& q);
Eigen::MatrixXd read_orthomat(std::istream& in);
void save_orthomat(const std::filesystem::path& path, const Eigen::MatrixXd& q);
Eigen::MatrixXd load_orthomat(const std::filesystem::path& path);

inline constexpr const char* kTrajectoryHeader =
    "k,sweep,i,j,theta,f,offdiag_sq,lambda_norm,skipped,wall_ms";

void write_trajectory_csv(std::ostream& out, std::span<const IterationRecord> records);
void save_trajectory_csv(const std::filesystem::path& path,
                         std::span<const IterationRecord> records);

}  // namespace orthodiag
