#pragma once
// Snapshot and report storage. Text header in both variants:
//   fbflow-field v1, radius=<r>, h=<h>, m=<m>, pair=<name>[, t=..][, step=..][, kind=full]
// CSV body (.csv extension): one row "x1,x2,class,u1,..,um" per domain node,
// class in {I, F, A}, 17 significant digits. Binary body (any other
// extension): little-endian 64-bit doubles, m per domain node, row-major;
// bit-exact round-trip.

#include "fbflow/grid.hpp"

#include "json.hpp"

#include <string>

namespace fbflow {

// Format chosen by extension: ".csv" text, otherwise binary.
void write_snapshot(const Field& f, const std::string& path);

// Validates on load: header version, row shape, node coordinates/classes
// (CSV), and that every non-zero value sits on the target (and on K for
// free-boundary nodes) within 1e-6. Exact-zero values are the "no data"
// convention (used outside the rescale clip) and are skipped. Throws
// VersionMismatch, CorruptRow (with the row), OffManifold (with the worst
// node), or IoError. Never repairs data.
Field read_snapshot(const std::string& path);

// JSON report with sorted keys and 2-space indent; callers set a top-level
// schema tag. Deterministic serialization for byte-identical reruns.
void write_json_report(const std::string& path, const nlohmann::json& doc);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace fbflow
