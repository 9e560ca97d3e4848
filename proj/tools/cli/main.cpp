#include <iostream>

#include <CLI11.hpp>

#include "commands.h"
#include "sdfilter/errors.h"
#include "sdfilter/parallel.h"

namespace {

void add_filter_flags(CLI::App* cmd, sdfilter::cli::FilterFlags& f) {
  cmd->add_option("--lambda", f.lambda, "Regularization weight (before rescaling)")->capture_default_str();
  cmd->add_option("--eta", f.eta, "Spatial scale, absolute or e.g. 3lc")->capture_default_str();
  cmd->add_option("--mu", f.mu, "Static guidance range scale")->capture_default_str();
  cmd->add_option("--nu", f.nu, "Dynamic range scale")->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap")->capture_default_str();
  cmd->add_option("--eps", f.eps, "Convergence threshold in degrees")->capture_default_str();
  cmd->add_option("--guidance", f.guidance, "identity or patch")
      ->check(CLI::IsMember({"identity", "patch"}))
      ->capture_default_str();
  cmd->add_option("--patch-radius", f.patch_radius, "Patch radius for patch guidance")->capture_default_str();
  cmd->add_option("--closeness-weight", f.closeness_weight, "Vertex update closeness weight")->capture_default_str();
  cmd->add_option("--vertex-iters", f.vertex_iters, "Vertex update iterations")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sdfilter::cli;
  CLI::App app{"Static/dynamic filtering, multiscale decomposition and texture filtering for meshes"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads, 0 = all cores")->capture_default_str();

  FilterCommand filter;
  auto* c_filter = app.add_subcommand("filter", "Filter face normals and update vertices");
  c_filter->add_option("--input", filter.input, "Input OBJ")->required();
  c_filter->add_option("--output", filter.output, "Output OBJ")->required();
  c_filter->add_option("--trace", filter.trace, "Per-iteration energy CSV");
  add_filter_flags(c_filter, filter.flags);

  DenoiseCommand denoise;
  denoise.flags.guidance = "patch";
  auto* c_denoise = app.add_subcommand("denoise", "Repeated filtering with patch guidance");
  c_denoise->add_option("--input", denoise.input, "Input OBJ")->required();
  c_denoise->add_option("--output", denoise.output, "Output OBJ")->required();
  c_denoise->add_option("--passes", denoise.passes, "Filter passes")->capture_default_str();
  c_denoise->add_option("--ground-truth", denoise.ground_truth, "Reference OBJ for error metrics");
  add_filter_flags(c_denoise, denoise.flags);

  DecomposeCommand decompose;
  auto* c_decompose = app.add_subcommand("decompose", "Build a multiscale decomposition");
  c_decompose->add_option("--input", decompose.input, "Input OBJ")->required();
  c_decompose->add_option("--schedule", decompose.schedule, "JSON list of level parameters")->required();
  c_decompose->add_option("--out-dir", decompose.out_dir, "Output directory")->required();
  c_decompose->add_option("--closeness-weight", decompose.closeness_weight)->capture_default_str();
  c_decompose->add_option("--vertex-iters", decompose.vertex_iters)->capture_default_str();

  CombineCommand combine;
  auto* c_combine = app.add_subcommand("combine", "Recombine a decomposition with new coefficients");
  c_combine->add_option("--dir", combine.dir, "Decomposition directory")->required();
  c_combine->add_option("--alpha", combine.alpha, "Comma-separated coefficients, one per level")->required();
  c_combine->add_option("--region", combine.region, "File of face indices to edit");
  c_combine->add_option("--output", combine.output, "Output OBJ")->required();

  TextureCommand texture;
  auto* c_texture = app.add_subcommand("texture-filter", "Filter a texture over the mesh surface");
  c_texture->add_option("--mesh", texture.mesh, "OBJ with texture coordinates")->required();
  c_texture->add_option("--texture", texture.texture, "PNG or PPM texture")->required();
  c_texture->add_option("--output", texture.output, "Output PNG or PPM")->required();
  c_texture->add_option("--lambda", texture.lambda)->capture_default_str();
  c_texture->add_option("--eta", texture.eta, "Absolute or in units of sample spacing, e.g. 3lc")->capture_default_str();
  c_texture->add_option("--mu", texture.mu)->capture_default_str();
  c_texture->add_option("--nu", texture.nu)->capture_default_str();
  c_texture->add_option("--max-iters", texture.max_iters)->capture_default_str();

  NuSelectCommand nu;
  auto* c_nu = app.add_subcommand("nu-select", "Suggest nu and mu from two smooth regions");
  c_nu->add_option("--mesh", nu.mesh, "Input OBJ")->required();
  c_nu->add_option("--region-a", nu.region_a, "Face indices of region A")->required();
  c_nu->add_option("--region-b", nu.region_b, "Face indices of region B")->required();
  c_nu->add_option("--mu-factor", nu.mu_factor, "mu = factor * nu, factor in [1, 10]")->capture_default_str();

  SynthCommand synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic test mesh");
  c_synth->add_option("--kind", synth.kind, "sphere-bumps, cube-bumps, plane-checker or knot-torus")
      ->capture_default_str();
  c_synth->add_option("--resolution", synth.resolution)->capture_default_str();
  c_synth->add_option("--amplitude", synth.amplitude)->capture_default_str();
  c_synth->add_option("--small-amplitude", synth.small_amplitude, "0 = amplitude / 4")->capture_default_str();
  c_synth->add_option("--seed", synth.seed)->capture_default_str();
  c_synth->add_option("--noise", synth.noise, "Normal noise sigma in units of l_c")->capture_default_str();
  c_synth->add_option("--noise-seed", synth.noise_seed)->capture_default_str();
  c_synth->add_flag("--uv", synth.uv, "Attach planar texture coordinates");
  c_synth->add_option("--output", synth.output, "Output OBJ")->required();

  SynthTextureCommand synth_tex;
  auto* c_synth_tex = app.add_subcommand("synth-texture", "Generate a synthetic texture");
  c_synth_tex->add_option("--pattern", synth_tex.pattern, "checker or spots")->capture_default_str();
  c_synth_tex->add_option("--size", synth_tex.size, "Width and height in pixels")->capture_default_str();
  c_synth_tex->add_option("--period", synth_tex.period, "Checker cell or spot diameter in pixels")
      ->capture_default_str();
  c_synth_tex->add_option("--count", synth_tex.count, "Number of spots")->capture_default_str();
  c_synth_tex->add_option("--seed", synth_tex.seed)->capture_default_str();
  c_synth_tex->add_option("--output", synth_tex.output, "Output PNG or PPM")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (threads < 0) throw sdfilter::InvalidArgument("--threads must be >= 0");
    sdfilter::set_thread_count(threads);
    if (c_filter->parsed()) return run_filter(filter, std::cout);
    if (c_denoise->parsed()) return run_denoise(denoise, std::cout);
    if (c_decompose->parsed()) return run_decompose(decompose, std::cout);
    if (c_combine->parsed()) return run_combine(combine, std::cout);
    if (c_texture->parsed()) return run_texture_filter(texture, std::cout);
    if (c_nu->parsed()) return run_nu_select(nu, std::cout);
    if (c_synth->parsed()) return run_synth(synth, std::cout);
    if (c_synth_tex->parsed()) return run_synth_texture(synth_tex, std::cout);
  } catch (const sdfilter::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
