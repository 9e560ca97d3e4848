#include "sdfilter/obj_io.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "sdfilter/errors.h"

namespace sdfilter {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view s, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("invalid number '" + std::string(s) + "'", line);
  }
  return v;
}

// Resolves a 1-based or negative (relative) index into a 0-based one.
int resolve_index(std::string_view s, int count, int line, const char* what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw ParseError(std::string("invalid ") + what + " index '" + std::string(s) + "'", line);
  }
  const int idx = v > 0 ? v - 1 : count + v;
  if (idx < 0 || idx >= count) {
    throw ParseError(std::string(what) + " index " + std::to_string(v) + " out of range", line);
  }
  return idx;
}

void format_number(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.9g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

LoadedMesh parse_obj(std::istream& in) {
  std::vector<Vec3> positions;
  std::vector<Vec2> texcoords;
  std::vector<Face> faces;
  std::vector<std::array<int, 3>> face_uv;
  bool all_uv = true;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string_view line = std::string_view(raw).substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) throw ParseError("vertex record needs three coordinates", line_no);
      positions.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                             parse_double(tok[3], line_no));
    } else if (tok[0] == "vt") {
      if (tok.size() < 3) throw ParseError("texture record needs two coordinates", line_no);
      texcoords.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no));
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw ParseError("face needs at least three vertices", line_no);
      std::vector<int> vs;
      std::vector<int> ts;
      bool has_uv = true;
      for (std::size_t k = 1; k < tok.size(); ++k) {
        const std::string_view corner = tok[k];
        const auto slash = corner.find('/');
        vs.push_back(resolve_index(corner.substr(0, slash), static_cast<int>(positions.size()),
                                   line_no, "vertex"));
        if (slash == std::string_view::npos) {
          has_uv = false;
          continue;
        }
        const std::string_view rest = corner.substr(slash + 1);
        const std::string_view vt = rest.substr(0, rest.find('/'));
        if (vt.empty()) {
          has_uv = false;
        } else {
          ts.push_back(
              resolve_index(vt, static_cast<int>(texcoords.size()), line_no, "texture"));
        }
      }
      for (std::size_t a = 0; a < vs.size(); ++a) {
        for (std::size_t b = a + 1; b < vs.size(); ++b) {
          if (vs[a] == vs[b]) throw ParseError("face repeats a vertex", line_no);
        }
      }
      if (!has_uv || ts.size() != vs.size()) all_uv = false;
      for (std::size_t k = 1; k + 1 < vs.size(); ++k) {
        faces.push_back({vs[0], vs[k], vs[k + 1]});
        if (all_uv) face_uv.push_back({ts[0], ts[k], ts[k + 1]});
      }
    }
  }

  Points V(static_cast<Eigen::Index>(positions.size()), 3);
  for (std::size_t i = 0; i < positions.size(); ++i) V.row(i) = positions[i].transpose();
  LoadedMesh out{TriMesh(std::move(V), std::move(faces)), std::nullopt, {}};
  if (all_uv && !texcoords.empty() && out.mesh.num_faces() > 0) {
    CornerUVs uv(face_uv.size());
    for (std::size_t f = 0; f < face_uv.size(); ++f) {
      for (int k = 0; k < 3; ++k) uv[f][k] = texcoords[face_uv[f][k]];
    }
    out.uv = std::move(uv);
  } else if (!texcoords.empty()) {
    out.warnings.push_back("texture coordinates ignored: not every face references them");
  }
  if (out.mesh.orientation_conflicts() > 0) {
    out.warnings.push_back(std::to_string(out.mesh.orientation_conflicts()) +
                           " edges with inconsistent orientation");
  }
  if (out.mesh.nonmanifold_edges() > 0) {
    out.warnings.push_back(std::to_string(out.mesh.nonmanifold_edges()) + " non-manifold edges");
  }
  return out;
}

LoadedMesh parse_obj_string(const std::string& text) {
  std::istringstream in(text);
  return parse_obj(in);
}

LoadedMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return parse_obj(in);
}

void write_obj(std::ostream& out, const TriMesh& mesh, const CornerUVs* uv) {
  std::string buf;
  buf.reserve(64 * static_cast<std::size_t>(mesh.num_vertices() + mesh.num_faces()));
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    buf += "v";
    for (int c = 0; c < 3; ++c) {
      buf += ' ';
      format_number(buf, mesh.vertices()(v, c));
    }
    buf += '\n';
  }
  const bool with_uv = uv != nullptr && static_cast<int>(uv->size()) == mesh.num_faces();
  if (with_uv) {
    for (const auto& corners : *uv) {
      for (const Vec2& t : corners) {
        buf += "vt ";
        format_number(buf, t.x());
        buf += ' ';
        format_number(buf, t.y());
        buf += '\n';
      }
    }
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    buf += "f";
    for (int k = 0; k < 3; ++k) {
      buf += ' ';
      buf += std::to_string(mesh.face(f)[k] + 1);
      if (with_uv) {
        buf += '/';
        buf += std::to_string(3 * f + k + 1);
      }
    }
    buf += '\n';
  }
  out << buf;
}

void save_obj(const std::filesystem::path& path, const TriMesh& mesh, const CornerUVs* uv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  write_obj(out, mesh, uv);
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

}  // namespace sdfilter
