#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdfilter/mesh.h"

namespace sdfilter::service {

/// Binary mesh payload, all fields little-endian:
///   "SDM1" | u32 vertex_count | u32 face_count
///   | f32 positions[3 * vertex_count] | u32 indices[3 * face_count]
///   | f32 face_values[face_count]
inline constexpr char kPayloadMagic[4] = {'S', 'D', 'M', '1'};

std::string encode_mesh_payload(const TriMesh& mesh, std::span<const double> face_values);

struct DecodedPayload {
  std::vector<float> positions;
  std::vector<std::uint32_t> indices;
  std::vector<float> face_values;
  std::uint32_t vertex_count = 0;
  std::uint32_t face_count = 0;
};

/// Throws InvalidArgument on a truncated or mislabeled payload.
DecodedPayload decode_mesh_payload(const std::string& bytes);

}  // namespace sdfilter::service
