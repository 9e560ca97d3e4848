#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdfilter/mesh.h"
#include "sdfilter/texture_filter.h"

namespace sdfilter {

struct LoadedMesh {
  TriMesh mesh;
  std::optional<CornerUVs> uv;  ///< present when every face carries vt indices
  std::vector<std::string> warnings;
};

/// Wavefront OBJ subset: v, vt and f records. Polygons are fan-split at their
/// first vertex; positive and negative indices are accepted; vn records and
/// every other record type are ignored. Throws ParseError with the line
/// number on malformed input.
LoadedMesh parse_obj(std::istream& in);
LoadedMesh parse_obj_string(const std::string& text);
LoadedMesh load_obj(const std::filesystem::path& path);

/// Writes v (and vt when `uv` is given) plus f records, 9 significant digits.
void write_obj(std::ostream& out, const TriMesh& mesh, const CornerUVs* uv = nullptr);
void save_obj(const std::filesystem::path& path, const TriMesh& mesh, const CornerUVs* uv = nullptr);

}  // namespace sdfilter
