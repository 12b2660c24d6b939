#include "fbflow/persist.hpp"

#include "fbflow/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace fbflow {

namespace {

char class_letter(NodeClass c) {
  switch (c) {
    case NodeClass::interior: return 'I';
    case NodeClass::free_boundary: return 'F';
    case NodeClass::arc: return 'A';
    case NodeClass::outside: break;
  }
  return '?';
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool has_csv_extension(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

std::string header_line(const Field& f) {
  const GridGeom& g = *f.grid;
  std::string h = "fbflow-field v1, radius=" + fmt17(g.radius) +
                  ", h=" + fmt17(g.h) + ", m=" + std::to_string(f.m) +
                  ", pair=" + f.pair_name + ", t=" + fmt17(f.time) +
                  ", step=" + std::to_string(f.step);
  if (g.full) h += ", kind=full";
  return h;
}

struct Header {
  double radius = 0.0, h = 0.0, t = 0.0;
  int m = 0;
  long step = 0;
  std::string pair;
  bool full = false;
};

Header parse_header(const std::string& line, const std::string& path) {
  std::vector<std::string> tokens;
  size_t pos = 0;
  while (pos <= line.size()) {
    size_t next = line.find(", ", pos);
    if (next == std::string::npos) next = line.size();
    tokens.push_back(line.substr(pos, next - pos));
    pos = next + 2;
  }
  if (tokens.empty() || tokens[0].rfind("fbflow-field", 0) != 0)
    throw IoError(path + ": not a field snapshot");
  if (tokens[0] != "fbflow-field v1")
    throw VersionMismatch(path + ": unsupported header '" + tokens[0] + "'");

  Header hd;
  bool have_radius = false, have_h = false, have_m = false, have_pair = false;
  for (size_t i = 1; i < tokens.size(); ++i) {
    const std::string& tk = tokens[i];
    const size_t eq = tk.find('=');
    if (eq == std::string::npos)
      throw IoError(path + ": malformed header token '" + tk + "'");
    const std::string key = tk.substr(0, eq);
    const std::string val = tk.substr(eq + 1);
    if (key == "radius") {
      hd.radius = std::stod(val);
      have_radius = true;
    } else if (key == "h") {
      hd.h = std::stod(val);
      have_h = true;
    } else if (key == "m") {
      hd.m = std::stoi(val);
      have_m = true;
    } else if (key == "pair") {
      hd.pair = val;
      have_pair = true;
    } else if (key == "t") {
      hd.t = std::stod(val);
    } else if (key == "step") {
      hd.step = std::stol(val);
    } else if (key == "kind") {
      hd.full = val == "full";
    } else {
      throw IoError(path + ": unknown header key '" + key + "'");
    }
  }
  if (!have_radius || !have_h || !have_m || !have_pair)
    throw IoError(path + ": header missing radius/h/m/pair");
  if (hd.m < 1 || hd.m > 8)
    throw IoError(path + ": ambient dimension out of range");
  return hd;
}

void validate_on_manifold(const Field& f, const std::string& path) {
  const auto pair = make_pair(f.pair_name);
  const GridGeom& g = *f.grid;
  double worst = 0.0;
  long worst_k = -1;
  for (long k = 0; k < g.node_count(); ++k) {
    const NodeClass c = g.classes[static_cast<size_t>(k)];
    if (c == NodeClass::outside) continue;
    const Vec v = f.value(k);
    if (v.norm() == 0.0) continue;  // "no data" convention
    double d = pair->target().distance(v);
    if (c == NodeClass::free_boundary) d = std::max(d, pair->distance_K(v));
    if (d > worst) {
      worst = d;
      worst_k = k;
    }
  }
  if (worst > 1e-6) {
    std::ostringstream os;
    os << path << ": node (" << g.x1(g.i_of(worst_k)) << ", "
       << g.x2(g.j_of(worst_k)) << ") is " << worst
       << " off the target/boundary manifold";
    throw OffManifold(os.str());
  }
}

}  // namespace

void write_snapshot(const Field& f, const std::string& path) {
  const GridGeom& g = *f.grid;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << header_line(f) << "\n";

  if (has_csv_extension(path)) {
    for (int j = g.j_lo(); j <= g.n; ++j) {
      for (int i = -g.n; i <= g.n; ++i) {
        if (!g.in_disc(i, j)) continue;
        const long k = g.index(i, j);
        out << fmt17(g.x1(i)) << ',' << fmt17(g.x2(j)) << ','
            << class_letter(g.classes[static_cast<size_t>(k)]);
        const double* v = f.at(k);
        for (int c = 0; c < f.m; ++c) out << ',' << fmt17(v[c]);
        out << '\n';
      }
    }
  } else {
    for (int j = g.j_lo(); j <= g.n; ++j) {
      for (int i = -g.n; i <= g.n; ++i) {
        if (!g.in_disc(i, j)) continue;
        out.write(reinterpret_cast<const char*>(f.at(g.index(i, j))),
                  static_cast<std::streamsize>(sizeof(double)) * f.m);
      }
    }
  }
  if (!out) throw IoError(path + ": write failed");
}

Field read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  const Header hd = parse_header(line, path);

  auto grid = hd.full ? GridGeom::full_disk(hd.radius, hd.h)
                      : GridGeom::half_disk(hd.radius, hd.h);
  Field f = make_field(grid, hd.m, hd.pair);
  f.time = hd.t;
  f.step = hd.step;

  if (has_csv_extension(path)) {
    long row = 0;
    for (int j = grid->j_lo(); j <= grid->n; ++j) {
      for (int i = -grid->n; i <= grid->n; ++i) {
        if (!grid->in_disc(i, j)) continue;
        ++row;
        if (!std::getline(in, line))
          throw CorruptRow(path + ": truncated at row " + std::to_string(row));
        std::vector<std::string> cells;
        size_t pos = 0;
        while (pos <= line.size()) {
          size_t next = line.find(',', pos);
          if (next == std::string::npos) next = line.size();
          cells.push_back(line.substr(pos, next - pos));
          pos = next + 1;
        }
        if (cells.size() != static_cast<size_t>(3 + hd.m))
          throw CorruptRow(path + ": row " + std::to_string(row) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(3 + hd.m));
        const long k = grid->index(i, j);
        double px, py;
        try {
          px = std::stod(cells[0]);
          py = std::stod(cells[1]);
        } catch (const std::exception&) {
          throw CorruptRow(path + ": row " + std::to_string(row) +
                           " has unparsable coordinates");
        }
        if (std::abs(px - grid->x1(i)) > 1e-12 ||
            std::abs(py - grid->x2(j)) > 1e-12)
          throw CorruptRow(path + ": row " + std::to_string(row) +
                           " coordinates do not match the lattice");
        if (cells[2].size() != 1 ||
            cells[2][0] != class_letter(grid->classes[static_cast<size_t>(k)]))
          throw CorruptRow(path + ": row " + std::to_string(row) +
                           " node class mismatch");
        double* dst = f.at(k);
        for (int c = 0; c < hd.m; ++c) {
          try {
            dst[c] = std::stod(cells[static_cast<size_t>(3 + c)]);
          } catch (const std::exception&) {
            throw CorruptRow(path + ": row " + std::to_string(row) +
                             " has an unparsable value");
          }
        }
      }
    }
  } else {
    long row = 0;
    for (int j = grid->j_lo(); j <= grid->n; ++j) {
      for (int i = -grid->n; i <= grid->n; ++i) {
        if (!grid->in_disc(i, j)) continue;
        ++row;
        double* dst = f.at(grid->index(i, j));
        in.read(reinterpret_cast<char*>(dst),
                static_cast<std::streamsize>(sizeof(double)) * hd.m);
        if (in.gcount() != static_cast<std::streamsize>(sizeof(double)) * hd.m)
          throw CorruptRow(path + ": truncated at node " + std::to_string(row));
      }
    }
  }

  validate_on_manifold(f, path);
  return f;
}

void write_json_report(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw IoError(path + ": write failed");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << content;
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace fbflow
