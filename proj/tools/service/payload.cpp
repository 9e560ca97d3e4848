#include "payload.h"

#include <bit>
#include <cstring>

#include "sdfilter/errors.h"

namespace sdfilter::service {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  pos += 4;
  return v;
}

}  // namespace

std::string encode_mesh_payload(const TriMesh& mesh, std::span<const double> face_values) {
  if (static_cast<int>(face_values.size()) != mesh.num_faces()) {
    throw InvalidArgument("payload needs one value per face");
  }
  const std::size_t nv = static_cast<std::size_t>(mesh.num_vertices());
  const std::size_t nf = static_cast<std::size_t>(mesh.num_faces());
  std::string out;
  out.reserve(12 + 12 * nv + 16 * nf);
  out.append(kPayloadMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(nv));
  put_u32(out, static_cast<std::uint32_t>(nf));
  const Points& v = mesh.vertices();
  for (std::size_t i = 0; i < nv; ++i) {
    for (int c = 0; c < 3; ++c) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v(i, c))));
  }
  for (const Face& f : mesh.faces()) {
    for (int c = 0; c < 3; ++c) put_u32(out, static_cast<std::uint32_t>(f[c]));
  }
  for (double x : face_values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  return out;
}

DecodedPayload decode_mesh_payload(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kPayloadMagic, 4) != 0) {
    throw InvalidArgument("not a mesh payload");
  }
  std::size_t pos = 4;
  DecodedPayload d;
  d.vertex_count = get_u32(bytes, pos);
  d.face_count = get_u32(bytes, pos);
  const std::size_t expected = 12 + 12 * static_cast<std::size_t>(d.vertex_count) +
                               16 * static_cast<std::size_t>(d.face_count);
  if (bytes.size() != expected) throw InvalidArgument("mesh payload has the wrong length");
  d.positions.resize(3 * static_cast<std::size_t>(d.vertex_count));
  for (float& x : d.positions) x = std::bit_cast<float>(get_u32(bytes, pos));
  d.indices.resize(3 * static_cast<std::size_t>(d.face_count));
  for (auto& x : d.indices) x = get_u32(bytes, pos);
  d.face_values.resize(d.face_count);
  for (float& x : d.face_values) x = std::bit_cast<float>(get_u32(bytes, pos));
  return d;
}

}  // namespace sdfilter::service
