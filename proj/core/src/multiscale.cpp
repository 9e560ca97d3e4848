#include "sdfilter/multiscale.h"

#include <bit>
#include <cstdint>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sdfilter/errors.h"
#include "sdfilter/obj_io.h"

namespace sdfilter {

namespace {

using nlohmann::json;

void write_float32_le(const std::filesystem::path& path, const Points& values) {
  std::string bytes;
  bytes.reserve(static_cast<std::size_t>(values.size()) * 4);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values(i, c)));
      for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Points read_float32_le(const std::filesystem::path& path, Eigen::Index rows) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != static_cast<std::size_t>(rows) * 12) {
    throw InvalidArgument("unexpected size of " + path.string());
  }
  Points out(rows, 3);
  for (Eigen::Index i = 0; i < rows * 3; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    }
    out(i / 3, i % 3) = std::bit_cast<float>(bits);
  }
  return out;
}

json params_to_json(const FilterParams& p) {
  return {{"lambda", p.lambda}, {"eta", p.eta},           {"mu", p.mu},
          {"nu", p.nu},         {"max_iters", p.max_iters}, {"eps", p.eps_degrees}};
}

FilterParams params_from_json(const json& j) {
  FilterParams p;
  p.lambda = j.at("lambda").get<double>();
  p.eta = j.at("eta").get<double>();
  p.mu = j.at("mu").get<double>();
  p.nu = j.at("nu").get<double>();
  p.max_iters = j.value("max_iters", 100);
  p.eps_degrees = j.value("eps", 0.2);
  return p;
}

}  // namespace

ScaleDecomposition decompose(const TriMesh& mesh, std::span<const FilterParams> schedule,
                             const VertexUpdateParams& vertex_params) {
  vertex_params.validate();
  // chain[0] = M^m (input), chain[s + 1] = result of schedule[s].
  std::vector<TriMesh> chain{mesh};
  std::vector<Points> normals{face_normals(mesh)};
  for (const FilterParams& level : schedule) {
    FilterParams p = level;
    p.unit_constrained = true;
    const TriMesh& current = chain.back();
    const FaceGeometry geom = compute_face_geometry(current);
    FilterDomain domain{geom.areas, build_neighborhoods(current, geom, p.eta)};
    const Signal initial = geom.normals;
    FilterOptions options;
    options.record_energy = false;
    const FilterResult filtered = filter_signal(domain, initial, initial, p, options);
    chain.push_back(update_vertices(current, filtered.signal, vertex_params));
    normals.push_back(face_normals(chain.back()));
  }

  const int m = static_cast<int>(schedule.size());
  ScaleDecomposition d;
  d.base = chain.back();
  d.base_normals = normals.back();
  d.original_vertices = mesh.vertices();
  d.original_normals = normals.front();
  d.vertex_params = vertex_params;
  for (int k = 1; k <= m; ++k) {
    // M^k is chain[m - k].
    d.vertex_deltas.push_back(chain[m - k].vertices() - chain[m - k + 1].vertices());
    d.normal_deltas.push_back(normals[m - k] - normals[m - k + 1]);
    FilterParams p = schedule[m - k];
    p.unit_constrained = true;
    d.level_params.push_back(p);
  }
  return d;
}

RegionMask RegionMask::from_faces(const TriMesh& mesh, std::span<const int> faces) {
  std::vector<char> vertices(mesh.num_vertices(), 0);
  for (int f : faces) {
    if (f < 0 || f >= mesh.num_faces()) {
      throw InvalidArgument("region references missing face " + std::to_string(f));
    }
    for (int v : mesh.face(f)) vertices[v] = 1;
  }
  return from_vertices(mesh, std::move(vertices));
}

RegionMask RegionMask::from_vertices(const TriMesh& mesh, std::vector<char> vertices) {
  if (static_cast<int>(vertices.size()) != mesh.num_vertices()) {
    throw InvalidArgument("vertex mask size does not match the mesh");
  }
  RegionMask mask;
  mask.faces.assign(mesh.num_faces(), 0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.face(f);
    mask.faces[f] = vertices[t[0]] && vertices[t[1]] && vertices[t[2]];
  }
  mask.vertices = std::move(vertices);
  return mask;
}

Recombiner::Recombiner(ScaleDecomposition decomposition)
    : decomp_(std::move(decomposition)),
      updater_(decomp_.base, decomp_.vertex_params.closeness_weight) {}

CombineTargets Recombiner::targets(std::span<const double> alpha, const RegionMask* mask) const {
  const int m = levels();
  if (static_cast<int>(alpha.size()) != m) {
    throw InvalidArgument("expected " + std::to_string(m) + " coefficients, got " +
                          std::to_string(alpha.size()));
  }
  CombineTargets t;
  t.vertices = decomp_.base.vertices();
  Points n = decomp_.base_normals;
  for (int k = 0; k < m; ++k) {
    t.vertices += alpha[k] * decomp_.vertex_deltas[k];
    n += alpha[k] * decomp_.normal_deltas[k];
  }
  for (Eigen::Index f = 0; f < n.rows(); ++f) {
    const double len = n.row(f).norm();
    if (len > 1e-12) {
      n.row(f) /= len;
    } else {
      n.row(f) = decomp_.base_normals.row(f);
      t.fallback_faces.push_back(static_cast<int>(f));
    }
  }
  if (mask != nullptr) {
    if (static_cast<Eigen::Index>(mask->vertices.size()) != t.vertices.rows() ||
        static_cast<Eigen::Index>(mask->faces.size()) != n.rows()) {
      throw InvalidArgument("region mask does not match the mesh");
    }
    for (Eigen::Index v = 0; v < t.vertices.rows(); ++v) {
      if (!mask->vertices[v]) t.vertices.row(v) = decomp_.original_vertices.row(v);
    }
    for (Eigen::Index f = 0; f < n.rows(); ++f) {
      if (!mask->faces[f]) n.row(f) = decomp_.original_normals.row(f);
    }
  }
  t.normals = std::move(n);
  return t;
}

Recombiner::Output Recombiner::combine(std::span<const double> alpha, const RegionMask* mask) const {
  CombineTargets t = targets(alpha, mask);
  const int iters = decomp_.vertex_params.iterations;
  if (mask != nullptr) {
    // Out-of-region vertices stay exactly at the original positions.
    std::vector<char> pinned(mask->vertices.size());
    for (std::size_t v = 0; v < pinned.size(); ++v) pinned[v] = mask->vertices[v] ? 0 : 1;
    const VertexUpdater local(decomp_.base, decomp_.vertex_params.closeness_weight, std::move(pinned));
    auto solved = local.solve(t.vertices, t.normals, iters);
    return {decomp_.base.with_vertices(std::move(solved.positions)), std::move(t)};
  }
  auto solved = updater_.solve(t.vertices, t.normals, iters);
  return {decomp_.base.with_vertices(std::move(solved.positions)), std::move(t)};
}

TriMesh combine(const ScaleDecomposition& decomposition, std::span<const double> alpha,
                const RegionMask* mask) {
  return Recombiner(decomposition).combine(alpha, mask).mesh;
}

Signal combine_texture(std::span<const Signal> levels, std::span<const double> alpha) {
  if (levels.empty()) throw InvalidArgument("at least one texture level is required");
  if (alpha.size() + 1 != levels.size()) {
    throw InvalidArgument("expected " + std::to_string(levels.size() - 1) + " coefficients");
  }
  Signal out = levels[0];
  for (std::size_t k = 1; k < levels.size(); ++k) {
    if (levels[k].rows() != out.rows() || levels[k].cols() != out.cols()) {
      throw InvalidArgument("texture levels differ in size");
    }
    out += alpha[k - 1] * (levels[k] - levels[k - 1]);
  }
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

void save_decomposition(const ScaleDecomposition& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const int m = d.levels();
  json index;
  index["format"] = "sdfilter-decomposition";
  index["version"] = 1;
  index["levels"] = m;
  index["vertex_count"] = d.base.num_vertices();
  index["face_count"] = d.base.num_faces();
  index["vertex_update"] = {{"closeness_weight", d.vertex_params.closeness_weight},
                            {"iterations", d.vertex_params.iterations}};
  json meshes = json::array();
  Points v = d.base.vertices();
  for (int k = 0; k <= m; ++k) {
    if (k > 0) v += d.vertex_deltas[k - 1];
    const std::string name = "level_" + std::to_string(k) + ".obj";
    save_obj(dir / name, d.base.with_vertices(k == m ? d.original_vertices : v));
    meshes.push_back(name);
  }
  index["meshes"] = meshes;
  json deltas = json::array();
  for (int k = 1; k <= m; ++k) {
    const std::string vname = "vertex_delta_" + std::to_string(k) + ".bin";
    const std::string nname = "normal_delta_" + std::to_string(k) + ".bin";
    write_float32_le(dir / vname, d.vertex_deltas[k - 1]);
    write_float32_le(dir / nname, d.normal_deltas[k - 1]);
    deltas.push_back({{"level", k},
                      {"params", params_to_json(d.level_params[k - 1])},
                      {"vertex_delta", vname},
                      {"normal_delta", nname}});
  }
  index["deltas"] = deltas;
  std::ofstream out(dir / "index.json");
  if (!out) throw InvalidArgument("cannot write " + (dir / "index.json").string());
  out << index.dump(2) << '\n';
}

ScaleDecomposition load_decomposition(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.json");
  if (!in) throw InvalidArgument("cannot open " + (dir / "index.json").string());
  json index;
  try {
    in >> index;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed decomposition index: ") + e.what());
  }
  try {
    const int m = index.at("levels").get<int>();
    const auto& meshes = index.at("meshes");
    if (static_cast<int>(meshes.size()) != m + 1) throw InvalidArgument("index lists wrong mesh count");
    ScaleDecomposition d;
    d.base = load_obj(dir / meshes.at(0).get<std::string>()).mesh;
    const TriMesh original = load_obj(dir / meshes.at(m).get<std::string>()).mesh;
    if (original.num_vertices() != d.base.num_vertices() || original.faces() != d.base.faces()) {
      throw InvalidArgument("level meshes do not share connectivity");
    }
    d.base_normals = face_normals(d.base);
    d.original_vertices = original.vertices();
    d.original_normals = face_normals(original);
    if (index.contains("vertex_update")) {
      d.vertex_params.closeness_weight = index["vertex_update"].value("closeness_weight", 0.001);
      d.vertex_params.iterations = index["vertex_update"].value("iterations", 20);
    }
    const auto& deltas = index.at("deltas");
    if (static_cast<int>(deltas.size()) != m) throw InvalidArgument("index lists wrong delta count");
    for (const auto& entry : deltas) {
      d.vertex_deltas.push_back(
          read_float32_le(dir / entry.at("vertex_delta").get<std::string>(), d.base.num_vertices()));
      d.normal_deltas.push_back(
          read_float32_le(dir / entry.at("normal_delta").get<std::string>(), d.base.num_faces()));
      FilterParams p = params_from_json(entry.at("params"));
      p.unit_constrained = true;
      d.level_params.push_back(p);
    }
    return d;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed decomposition index: ") + e.what());
  }
}

}  // namespace sdfilter
