#include "tailsitter/logs.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <sstream>

namespace tailsitter {

const std::vector<std::string>& TelemetryLog::columns() {
    static const std::vector<std::string> names{
        "t",          "q_cmd_eta",   "q_cmd_x",    "q_cmd_y",    "q_cmd_z",  "q_meas_eta", "q_meas_x",
        "q_meas_y",   "q_meas_z",    "w_cmd_x",    "w_cmd_y",    "w_cmd_z",  "w_meas_x",   "w_meas_y",
        "w_meas_z",   "torque_cmd_x", "torque_cmd_y", "torque_cmd_z", "thrust_cmd", "flags",  "alt_cmd",
        "alt_meas",   "vz_meas"};
    return names;
}

void TelemetryLog::append(const TelemetryRow& r) {
    const auto q = [](const UnitQuaternion& v) {
        return fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}", v.eta(), v.epsilon().x(), v.epsilon().y(), v.epsilon().z());
    };
    const auto v3 = [](const Vec3& v) { return fmt::format("{:.17g},{:.17g},{:.17g}", v.x(), v.y(), v.z()); };
    lines_.push_back(fmt::format("{:.17g},{},{},{},{},{},{:.17g},{},{:.17g},{:.17g},{:.17g}\n", r.t, q(r.q_cmd), q(r.q_meas),
                                 v3(r.w_cmd), v3(r.w_meas), v3(r.torque_cmd), r.thrust_cmd, r.flags, r.alt_cmd,
                                 r.alt_meas, r.vz_meas));
}

namespace {

std::string join_csv(const std::vector<std::string>& names, const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
    out += '\n';
    for (const auto& l : lines) out += l;
    return out;
}

}  // namespace

std::string TelemetryLog::to_csv() const { return join_csv(columns(), lines_); }

const std::vector<std::string>& StateLog::columns() {
    static const std::vector<std::string> names{"t",  "px", "py", "pz", "vx", "vy", "vz", "eta", "ex", "ey",
                                                "ez", "wx", "wy", "wz", "m1", "m2", "m3", "m4", "sat_flag"};
    return names;
}

void StateLog::append(double t, const RigidBodyState& s, const MotorCommand& m, bool saturated) {
    const Vec3& e = s.q.epsilon();
    lines_.push_back(fmt::format(
        "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
        "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n",
        t, s.p.x(), s.p.y(), s.p.z(), s.v.x(), s.v.y(), s.v.z(), s.q.eta(), e.x(), e.y(), e.z(), s.omega.x(),
        s.omega.y(), s.omega.z(), m.u[0], m.u[1], m.u[2], m.u[3], saturated ? 1 : 0));
}

std::string StateLog::to_csv() const { return join_csv(columns(), lines_); }

bool CsvTable::has(const std::string& name) const {
    for (const auto& n : names)
        if (n == name) return true;
    return false;
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return columns[i];
    throw SchemaError("log has no column '" + name + "'");
}

CsvTable CsvTable::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    CsvTable t;
    if (!std::getline(in, line)) throw SchemaError("empty log");
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) {
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            t.names.push_back(cell);
        }
    }
    if (t.names.empty()) throw SchemaError("log header is empty");
    t.columns.assign(t.names.size(), {});
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const char* p = line.c_str();
        for (std::size_t c = 0; c < t.names.size(); ++c) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p) throw SchemaError(fmt::format("log line {}: column {} is not a number", lineno, t.names[c]));
            t.columns[c].push_back(v);
            p = end;
            const bool last = c + 1 == t.names.size();
            if (!last) {
                if (*p != ',') throw SchemaError(fmt::format("log line {}: expected {} columns", lineno, t.names.size()));
                ++p;
            }
        }
        while (*p == '\r' || *p == ' ') ++p;
        if (*p != '\0') throw SchemaError(fmt::format("log line {}: more than {} columns", lineno, t.names.size()));
    }
    return t;
}

CompareReport compare_logs(const CsvTable& a, const CsvTable& b) {
    if (a.names != b.names) throw SchemaError("logs have different columns");
    if (a.rows() != b.rows()) throw SchemaError(fmt::format("logs have {} and {} rows", a.rows(), b.rows()));
    CompareReport r;
    r.rows = a.rows();
    for (std::size_t c = 0; c < a.names.size(); ++c) {
        ColumnDiff d;
        d.name = a.names[c];
        double ss = 0.0;
        for (std::size_t i = 0; i < r.rows; ++i) {
            const double x = a.columns[c][i], y = b.columns[c][i];
            // Bit equality: identical NaNs count as equal, +0 and -0 do not.
            if (std::memcmp(&x, &y, sizeof(double)) != 0) d.identical = false;
            const double e = std::abs(x - y);
            d.max_abs = std::max(d.max_abs, std::isnan(e) ? (std::isnan(x) && std::isnan(y) ? 0.0 : INFINITY) : e);
            if (std::isfinite(e)) ss += e * e;
        }
        d.rms = r.rows ? std::sqrt(ss / static_cast<double>(r.rows)) : 0.0;
        r.identical = r.identical && d.identical;
        r.columns.push_back(d);
    }
    return r;
}

std::string CompareReport::to_text() const {
    std::string out = fmt::format("rows: {}\nverdict: {}\n{:<16} {:>14} {:>14} {}\n", rows,
                                  identical ? "identical" : "different", "column", "max_abs", "rms", "identical");
    for (const auto& c : columns)
        out += fmt::format("{:<16} {:>14.6g} {:>14.6g} {}\n", c.name, c.max_abs, c.rms, c.identical ? "yes" : "no");
    return out;
}

}  // namespace tailsitter
