#ifndef CLAB_IO_HPP
#define CLAB_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "clab/analysis.hpp"
#include "clab/corrector.hpp"
#include "clab/env.hpp"
#include "clab/walk.hpp"

namespace clab {

// Environment file: one JSON header line (format version, geometry, sampler
// metadata) followed by CSV edge rows `x_index,y_index,conductance`.
void save_environment(const Environment& env, const std::string& path);
Environment load_environment(const std::string& path);  // re-validates invariants

// Trajectory dump: CSV `time,site_index`.
void save_trajectory(const Trajectory& traj, const std::string& path);

// Corrector dump: CSV `site_index,chi_1,...,chi_d`.
void save_corrector(const CorrectorField& field, const std::string& path);

// d x d matrix as a JSON object with entries and dimensions.
void save_sigma(const Eigen::MatrixXd& sigma, double residual, const std::string& path);

// Verification report: JSON array of check records plus a one-row-per-check
// summary CSV (name, lhs, rhs, margin, fitted, pass).
void save_checks(const std::vector<BoundCheck>& checks, const std::string& jsonPath,
                 const std::string& csvPath);

std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace clab

#endif
