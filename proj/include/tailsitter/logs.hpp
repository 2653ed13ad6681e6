#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailsitter/attitude.hpp"
#include "tailsitter/rigid_body.hpp"

namespace tailsitter {

/// Bits of the telemetry `flags` column.
enum TelemetryFlag : std::uint32_t {
    kFlagMotorSaturated = 1u << 0,
    kFlagAeroClamped = 1u << 1,
    kFlagNoVerticalAuthority = 1u << 2,
    kFlagRateClamped = 1u << 3,
    kFlagThrustClamped = 1u << 4,
    kFlagPitchNotch = 1u << 5,
    kFlagRateMode = 1u << 6,  // attitude loop bypassed, rate commanded directly
    kFlagSweep = 1u << 7,
};

struct TelemetryRow {
    double t = 0.0;
    UnitQuaternion q_cmd;
    UnitQuaternion q_meas;
    Vec3 w_cmd = Vec3::Zero();
    Vec3 w_meas = Vec3::Zero();
    Vec3 torque_cmd = Vec3::Zero();
    double thrust_cmd = 0.0;
    std::uint32_t flags = 0;
    double alt_cmd = 0.0;
    double alt_meas = 0.0;
    double vz_meas = 0.0;
};

/// Per-tick CSV. Vectors are expanded into components; values print with 17 significant digits
/// so a log round-trips bit-exactly.
class TelemetryLog {
public:
    static const std::vector<std::string>& columns();

    void append(const TelemetryRow& row);
    std::size_t size() const { return lines_.size(); }
    std::string to_csv() const;

private:
    std::vector<std::string> lines_;
};

/// Vehicle state per controller tick: `t,px,py,pz,vx,vy,vz,eta,ex,ey,ez,wx,wy,wz,m1,m2,m3,m4,sat_flag`.
class StateLog {
public:
    static const std::vector<std::string>& columns();

    void append(double t, const RigidBodyState& s, const MotorCommand& m, bool saturated);
    std::size_t size() const { return lines_.size(); }
    std::string to_csv() const;

private:
    std::vector<std::string> lines_;
};

/// Raised when two logs cannot be compared column by column.
class SchemaError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numeric CSV held column-wise.
struct CsvTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    bool has(const std::string& name) const;
    /// Throws SchemaError for an unknown column.
    const std::vector<double>& column(const std::string& name) const;

    /// First line is the header. Throws SchemaError on ragged rows or non-numeric cells.
    static CsvTable parse(const std::string& text);
};

struct ColumnDiff {
    std::string name;
    double max_abs = 0.0;
    double rms = 0.0;
    bool identical = true;
};

struct CompareReport {
    std::size_t rows = 0;
    std::vector<ColumnDiff> columns;
    bool identical = true;  // every value bit-equal

    std::string to_text() const;
};

/// Per-column max and RMS differences. Throws SchemaError when headers or row counts differ.
CompareReport compare_logs(const CsvTable& a, const CsvTable& b);

}  // namespace tailsitter
