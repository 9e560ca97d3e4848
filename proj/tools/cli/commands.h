#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace sdfilter::cli {

struct FilterFlags {
  double lambda = 1.0;
  std::string eta = "3lc";
  double mu = 1.0;
  double nu = 0.3;
  int max_iters = 100;
  double eps = 0.2;
  std::string guidance = "identity";
  std::string patch_radius = "2lc";
  double closeness_weight = 0.001;
  int vertex_iters = 20;
};

struct FilterCommand {
  std::string input;
  std::string output;
  std::string trace;
  FilterFlags flags;
};

struct DenoiseCommand {
  std::string input;
  std::string output;
  std::string ground_truth;
  int passes = 2;
  FilterFlags flags;
};

struct DecomposeCommand {
  std::string input;
  std::string schedule;
  std::string out_dir;
  double closeness_weight = 0.001;
  int vertex_iters = 20;
};

struct CombineCommand {
  std::string dir;
  std::string alpha;
  std::string region;
  std::string output;
};

struct TextureCommand {
  std::string mesh;
  std::string texture;
  std::string output;
  double lambda = 1.0;
  std::string eta = "3lc";
  double mu = 1.0;
  double nu = 0.3;
  int max_iters = 50;
};

struct NuSelectCommand {
  std::string mesh;
  std::string region_a;
  std::string region_b;
  double mu_factor = 5.0;
};

struct SynthCommand {
  std::string kind = "sphere-bumps";
  int resolution = 4;
  double amplitude = 0.05;
  double small_amplitude = 0.0;
  std::uint64_t seed = 1;
  double noise = 0.0;
  std::uint64_t noise_seed = 1;
  bool uv = false;
  std::string output;
};

struct SynthTextureCommand {
  std::string pattern = "checker";
  int size = 256;
  double period = 8.0;
  int count = 40;
  std::uint64_t seed = 1;
  std::string output;
};

/// Each command writes its report to `out` and returns the process exit
/// code. Library errors propagate to the caller.
int run_filter(const FilterCommand& cmd, std::ostream& out);
int run_denoise(const DenoiseCommand& cmd, std::ostream& out);
int run_decompose(const DecomposeCommand& cmd, std::ostream& out);
int run_combine(const CombineCommand& cmd, std::ostream& out);
int run_texture_filter(const TextureCommand& cmd, std::ostream& out);
int run_nu_select(const NuSelectCommand& cmd, std::ostream& out);
int run_synth(const SynthCommand& cmd, std::ostream& out);
int run_synth_texture(const SynthTextureCommand& cmd, std::ostream& out);

}  // namespace sdfilter::cli
