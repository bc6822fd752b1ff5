#pragma once

// Trace CSV: one row per environment step.
//
//   step,obs_0..obs_{d-1},action,reward,done,next_obs_0..next_obs_{d-1},timeout
//
// `done` is the stored terminal flag of the transition, `timeout` marks an
// episode cut by the step limit.  Booleans are written as 0/1.

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ddqn/csv.hpp"
#include "ddqn/errors.hpp"
#include "ddqn/transition.hpp"

namespace ddqn::envs {

inline void write_trace_header(std::ostream& os, int obs_dim) {
    os << "step";
    for (int i = 0; i < obs_dim; ++i) os << ",obs_" << i;
    os << ",action,reward,done";
    for (int i = 0; i < obs_dim; ++i) os << ",next_obs_" << i;
    os << ",timeout\n";
}

inline void write_trace_row(std::ostream& os, const TraceRow& row) {
    os << row.step;
    for (double x : row.t.s) os << ',' << csv::format(x);
    os << ',' << row.t.a << ',' << csv::format(row.t.r) << ',' << (row.t.done ? 1 : 0);
    for (double x : row.t.s_next) os << ',' << csv::format(x);
    os << ',' << (row.timeout ? 1 : 0) << '\n';
}

inline void write_trace(std::ostream& os, std::span<const TraceRow> rows, int obs_dim) {
    write_trace_header(os, obs_dim);
    for (const auto& row : rows) write_trace_row(os, row);
}

inline void save_trace(const std::filesystem::path& path, std::span<const TraceRow> rows, int obs_dim) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_trace(os, rows, obs_dim);
    if (!os) throw IoError("write to " + path.string() + " failed");
}

inline std::vector<TraceRow> read_trace(std::istream& is) {
    std::string line;
    if (!csv::next_line(is, line)) throw IoError("trace: missing header");
    const auto header = csv::split(line);
    if (header.size() < 6 || (header.size() - 5) % 2 != 0 || header.front() != "step")
        throw IoError("trace: malformed header");
    const std::size_t d = (header.size() - 5) / 2;
    std::vector<TraceRow> rows;
    while (csv::next_line(is, line)) {
        const auto f = csv::split(line);
        if (f.size() != header.size()) throw IoError("trace: row has wrong field count: " + line);
        TraceRow row;
        row.step = csv::parse_int<std::uint64_t>(f[0]);
        for (std::size_t i = 0; i < d; ++i) row.t.s.push_back(csv::parse_double(f[1 + i]));
        row.t.a = csv::parse_int<int>(f[1 + d]);
        row.t.r = csv::parse_double(f[2 + d]);
        row.t.done = csv::parse_int<int>(f[3 + d]) != 0;
        for (std::size_t i = 0; i < d; ++i) row.t.s_next.push_back(csv::parse_double(f[4 + d + i]));
        row.timeout = csv::parse_int<int>(f[4 + 2 * d]) != 0;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<TraceRow> load_trace(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    return read_trace(is);
}

}  // namespace ddqn::envs
