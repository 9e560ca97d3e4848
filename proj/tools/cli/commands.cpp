#include "commands.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "../common/app.h"
#include "sdfilter/errors.h"
#include "sdfilter/guidance.h"
#include "sdfilter/metrics.h"
#include "sdfilter/multiscale.h"
#include "sdfilter/obj_io.h"
#include "sdfilter/param_select.h"
#include "sdfilter/synthetic.h"
#include "sdfilter/texture_filter.h"
#include "sdfilter/vertex_update.h"

namespace sdfilter::cli {

namespace {

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

std::string num(double value) { return fmt("%.9g", value); }

LoadedMesh load_reporting(const std::string& path) {
  LoadedMesh loaded = load_obj(path);
  for (const auto& w : loaded.warnings) std::cerr << path << ": warning: " << w << '\n';
  return loaded;
}

FilterParams resolve(const FilterFlags& flags, double lc) {
  FilterParams p;
  p.lambda = flags.lambda;
  p.eta = app::resolve_length(flags.eta, lc);
  p.mu = flags.mu;
  p.nu = flags.nu;
  p.max_iters = flags.max_iters;
  p.eps_degrees = flags.eps;
  p.unit_constrained = true;
  p.validate();
  return p;
}

VertexUpdateParams vertex_params(double w, int iterations) {
  VertexUpdateParams v;
  v.closeness_weight = w;
  v.iterations = iterations;
  v.validate();
  return v;
}

void print_params(std::ostream& out, const FilterParams& p, double lc) {
  out << "l_c=" << num(lc) << " lambda=" << num(p.lambda) << " eta=" << num(p.eta)
      << " mu=" << num(p.mu) << " nu=" << num(p.nu) << " max_iters=" << p.max_iters
      << " eps=" << num(p.eps_degrees) << '\n';
}

Signal make_guidance(const std::string& kind, const TriMesh& mesh, const FaceGeometry& geom,
                     const std::string& patch_radius, double lc) {
  if (kind == "identity") return identity_guidance(geom.normals);
  if (kind == "patch") return patch_guidance(mesh, geom, geom.normals, app::resolve_length(patch_radius, lc));
  throw InvalidArgument("unknown guidance '" + kind + "' (expected identity or patch)");
}

struct PassResult {
  TriMesh mesh;
  FilterResult filter;
};

PassResult filter_pass(const TriMesh& mesh, const FilterParams& params, const FilterFlags& flags,
                       const std::string& guidance, double lc, bool record_energy) {
  const FaceGeometry geom = compute_face_geometry(mesh);
  const FilterDomain domain{geom.areas, build_neighborhoods(mesh, geom, params.eta)};
  const Signal g = make_guidance(guidance, mesh, geom, flags.patch_radius, lc);
  FilterOptions options;
  options.record_energy = record_energy;
  FilterResult result = filter_signal(domain, geom.normals, g, params, options);
  TriMesh updated = update_vertices(mesh, result.signal, vertex_params(flags.closeness_weight, flags.vertex_iters));
  return {std::move(updated), std::move(result)};
}

void write_trace(const std::string& path, const FilterResult& result) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << "iteration,fidelity,regularizer,total\n";
  for (std::size_t k = 1; k < result.trace.size(); ++k) {
    const auto& e = result.trace[k];
    out << k << ',' << fmt("%.17g", e.fidelity) << ',' << fmt("%.17g", e.regularizer) << ','
        << fmt("%.17g", e.total) << '\n';
  }
}

}  // namespace

int run_filter(const FilterCommand& cmd, std::ostream& out) {
  const LoadedMesh in = load_reporting(cmd.input);
  const double lc = average_centroid_spacing(in.mesh, compute_face_geometry(in.mesh));
  const FilterParams params = resolve(cmd.flags, lc);
  print_params(out, params, lc);
  const PassResult r = filter_pass(in.mesh, params, cmd.flags, cmd.flags.guidance, lc, !cmd.trace.empty());
  if (!cmd.trace.empty()) write_trace(cmd.trace, r.filter);
  save_obj(cmd.output, r.mesh, in.uv ? &*in.uv : nullptr);
  out << "iterations=" << r.filter.iterations << " converged=" << (r.filter.converged ? "yes" : "no")
      << '\n';
  return 0;
}

int run_denoise(const DenoiseCommand& cmd, std::ostream& out) {
  if (cmd.passes < 0) throw InvalidArgument("--passes must be >= 0");
  const LoadedMesh in = load_reporting(cmd.input);
  std::optional<TriMesh> truth;
  if (!cmd.ground_truth.empty()) {
    truth = load_reporting(cmd.ground_truth).mesh;
    if (truth->num_vertices() != in.mesh.num_vertices() || truth->num_faces() != in.mesh.num_faces()) {
      throw InvalidArgument("ground truth does not match the input mesh");
    }
  }
  TriMesh mesh = in.mesh;
  if (cmd.passes == 0) {
    std::filesystem::copy_file(cmd.input, cmd.output, std::filesystem::copy_options::overwrite_existing);
  } else {
    const double lc = average_centroid_spacing(in.mesh, compute_face_geometry(in.mesh));
    const FilterParams params = resolve(cmd.flags, lc);
    print_params(out, params, lc);
    for (int pass = 1; pass <= cmd.passes; ++pass) {
      PassResult r = filter_pass(mesh, params, cmd.flags, cmd.flags.guidance, lc, false);
      out << "pass " << pass << ": iterations=" << r.filter.iterations << '\n';
      mesh = std::move(r.mesh);
    }
    save_obj(cmd.output, mesh, in.uv ? &*in.uv : nullptr);
  }
  if (truth) {
    const Signal gt = face_normals(*truth);
    const double delta_in = mean_normal_deviation(face_normals(in.mesh), gt);
    const double dmean_in = mean_vertex_deviation(align_centroids(in.mesh, *truth), *truth);
    const double delta_out = mean_normal_deviation(face_normals(mesh), gt);
    const double dmean_out = mean_vertex_deviation(align_centroids(mesh, *truth), *truth);
    out << "input: delta=" << num(delta_in) << " D_mean=" << num(dmean_in) << '\n';
    out << "output: delta=" << num(delta_out) << " D_mean=" << num(dmean_out) << '\n';
  }
  return 0;
}

int run_decompose(const DecomposeCommand& cmd, std::ostream& out) {
  const LoadedMesh in = load_reporting(cmd.input);
  const double lc = average_centroid_spacing(in.mesh, compute_face_geometry(in.mesh));
  const std::vector<FilterParams> schedule = app::load_schedule(cmd.schedule, lc);
  for (const auto& p : schedule) print_params(out, p, lc);
  const ScaleDecomposition d =
      decompose(in.mesh, schedule, vertex_params(cmd.closeness_weight, cmd.vertex_iters));
  save_decomposition(d, cmd.out_dir);
  out << "levels=" << d.levels() << '\n';
  return 0;
}

int run_combine(const CombineCommand& cmd, std::ostream& out) {
  Recombiner recombiner(load_decomposition(cmd.dir));
  const std::vector<double> alpha = app::parse_number_list(cmd.alpha);
  std::optional<RegionMask> mask;
  if (!cmd.region.empty()) {
    const std::vector<int> faces = app::load_index_list(cmd.region);
    mask = RegionMask::from_faces(recombiner.decomposition().base, faces);
  }
  const auto result = recombiner.combine(alpha, mask ? &*mask : nullptr);
  save_obj(cmd.output, result.mesh);
  const ConsistencyReport report = normal_consistency_report(result.mesh, result.targets.normals);
  out << "mean_deviation=" << num(report.mean_deviation_degrees) << " flips=" << report.flips << '\n';
  return 0;
}

int run_texture_filter(const TextureCommand& cmd, std::ostream& out) {
  const LoadedMesh in = load_reporting(cmd.mesh);
  if (!in.uv) throw InvalidArgument(cmd.mesh + " has no texture coordinates on every face");
  const Image image = load_image(cmd.texture);
  const SurfaceSamples samples = lift_texture(in.mesh, *in.uv, image);
  if (samples.size() == 0) throw InvalidArgument("no texture pixel maps onto the mesh");
  const double spacing = sample_spacing(samples);
  FilterParams p = texture_filter_defaults();
  p.lambda = cmd.lambda;
  p.eta = app::resolve_length(cmd.eta, spacing);
  p.mu = cmd.mu;
  p.nu = cmd.nu;
  p.max_iters = cmd.max_iters;
  p.validate();
  print_params(out, p, spacing);
  const Signal colors = filter_colors(samples, p);
  save_image(write_back(samples, colors, image), cmd.output);
  out << "samples=" << samples.size() << " skipped_faces=" << samples.skipped_faces << '\n';
  return 0;
}

int run_nu_select(const NuSelectCommand& cmd, std::ostream& out) {
  const LoadedMesh in = load_reporting(cmd.mesh);
  const FaceGeometry geom = compute_face_geometry(in.mesh);
  const RegionStats a = region_stats(geom, geom.normals, app::load_index_list(cmd.region_a));
  const RegionStats b = region_stats(geom, geom.normals, app::load_index_list(cmd.region_b));
  const NuRange r = nu_range(a, b, cmd.mu_factor);
  out << "nu_min=" << num(r.nu_min) << " nu_max=" << num(r.nu_max) << '\n';
  if (r.accepted) {
    out << "nu=" << num(r.nu) << " mu=" << num(r.mu) << '\n';
  } else {
    out << "rejected: nu_max < nu_min; select another pair of regions\n";
  }
  return 0;
}

int run_synth(const SynthCommand& cmd, std::ostream& out) {
  SyntheticParams p;
  p.kind = parse_synthetic_kind(cmd.kind);
  p.resolution = cmd.resolution;
  p.amplitude = cmd.amplitude;
  p.small_amplitude = cmd.small_amplitude;
  p.seed = cmd.seed;
  TriMesh mesh = make_synthetic(p);
  if (cmd.noise > 0.0) mesh = add_normal_noise(mesh, cmd.noise, cmd.noise_seed);
  if (cmd.uv) {
    const CornerUVs uv = planar_uv(mesh);
    save_obj(cmd.output, mesh, &uv);
  } else {
    save_obj(cmd.output, mesh);
  }
  out << "vertices=" << mesh.num_vertices() << " faces=" << mesh.num_faces() << '\n';
  return 0;
}

int run_synth_texture(const SynthTextureCommand& cmd, std::ostream& out) {
  Image img;
  if (cmd.pattern == "checker") {
    img = make_checker_texture(cmd.size, static_cast<int>(cmd.period), Vec3(0.9, 0.8, 0.2), Vec3(0.2, 0.1, 0.05));
  } else if (cmd.pattern == "spots") {
    img = make_spots_texture(cmd.size, 0.5 * cmd.period, cmd.count, cmd.seed);
  } else {
    throw InvalidArgument("unknown pattern '" + cmd.pattern + "' (expected checker or spots)");
  }
  save_image(img, cmd.output);
  out << "width=" << img.width << " height=" << img.height << '\n';
  return 0;
}

}  // namespace sdfilter::cli
