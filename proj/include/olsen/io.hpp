#pragma once

#include <json.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "olsen/integrate.hpp"

namespace olsen {

/// Fixed 17-significant-digit formatting so emitted files round-trip doubles
/// and are byte-reproducible across runs.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <std::size_t N>
void write_trajectory_csv(const std::string& path, const Trajectory<N>& traj,
                          const std::array<std::string, N>& names) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "t";
    for (const auto& n : names) out << "," << n;
    out << "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << fmt17(traj.times[i]);
        for (std::size_t c = 0; c < N; ++c) out << "," << fmt17(traj.states[i][c]);
        out << "\n";
    }
}

/// JSON form of a trajectory with its metadata (time scale, step counts).
template <std::size_t N>
nlohmann::json trajectory_to_json(const Trajectory<N>& traj,
                                  const std::array<std::string, N>& names) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["time_scale"] = traj.time_scale;
    j["n_accepted"] = traj.n_accepted;
    j["n_rejected"] = traj.n_rejected;
    j["n_rhs_evals"] = traj.n_rhs_evals;
    j["columns"] = names;
    j["t"] = traj.times;
    auto& cols = j["states"];
    for (std::size_t c = 0; c < N; ++c) {
        std::vector<double> col(traj.states.size());
        for (std::size_t i = 0; i < traj.states.size(); ++i) col[i] = traj.states[i][c];
        cols[names[c]] = std::move(col);
    }
    return j;
}

template <std::size_t N>
void write_trajectory_json(const std::string& path, const Trajectory<N>& traj,
                           const std::array<std::string, N>& names) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << trajectory_to_json(traj, names).dump(2) << "\n";
}

template <std::size_t N>
void write_polyline_csv(const std::string& path, const std::vector<Vec<N>>& pts,
                        const std::array<std::string, N>& names) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t c = 0; c < N; ++c) out << (c ? "," : "") << names[c];
    out << "\n";
    for (const auto& p : pts) {
        for (std::size_t c = 0; c < N; ++c) out << (c ? "," : "") << fmt17(p[c]);
        out << "\n";
    }
}

}  // namespace olsen
