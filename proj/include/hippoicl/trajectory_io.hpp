#pragma once

#include <iosfwd>
#include <string>

#include "hippoicl/signals.hpp"

namespace hippoicl {

/// CSV with header "index,t,u"; values printed with 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void save_trajectory_csv(const Trajectory& traj, const std::string& path);

/**
 * Binary trajectory file, all fields little-endian:
 *   8 bytes  magic "HIPPOTRJ"
 *   f64      dt
 *   u64      number of samples
 *   u64      seed
 *   f64[n]   samples
 * Generator metadata is not stored.
 */
void write_trajectory_binary(const Trajectory& traj, std::ostream& out);
Trajectory read_trajectory_binary(std::istream& in);
void save_trajectory_binary(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory_binary(const std::string& path);

}  // namespace hippoicl
