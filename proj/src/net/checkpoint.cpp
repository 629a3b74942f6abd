/*
 Copyright 2026 The MISO Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "miso/net/checkpoint.hpp"

#include "miso/core/binary_io.hpp"
#include "miso/core/error.hpp"

namespace miso {

namespace {

void write_layer(io::ByteWriter& w, const LayerSpec& l) {
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(l.in));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(l.out));
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(l.act));
}

LayerSpec read_layer(io::ByteReader& r, Eigen::Index& cursor) {
  LayerSpec l;
  l.in = static_cast<int>(r.uint<std::uint32_t>());
  l.out = static_cast<int>(r.uint<std::uint32_t>());
  const auto act = r.uint<std::uint8_t>();
  if (act > static_cast<std::uint8_t>(Activation::gelu)) throw FormatError("unknown activation tag");
  l.act = static_cast<Activation>(act);
  l.w_offset = cursor;
  l.b_offset = cursor + static_cast<Eigen::Index>(l.in) * l.out;
  cursor = l.b_offset + l.out;
  return l;
}

void write_vec(io::ByteWriter& w, const Vector& v) { w.f64s({v.data(), static_cast<std::size_t>(v.size())}); }

Vector read_vec(io::ByteReader& r, Eigen::Index n) {
  Vector v(n);
  r.f64s({v.data(), static_cast<std::size_t>(n)});
  return v;
}

}  // namespace

std::vector<char> checkpoint_encode(const ModelParams& p) {
  p.validate();
  io::ByteWriter w;
  w.bytes(std::string_view(kCheckpointMagic, 7));
  w.uint<std::uint32_t>(kCheckpointVersion);
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(p.env_id));
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(p.loss_kind));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(p.feature_dim));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(p.horizon));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(p.control_dim));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(p.K()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(p.trunk.size()));
  for (const auto& l : p.trunk) write_layer(w, l);
  for (const auto& l : p.heads) write_layer(w, l);
  write_vec(w, p.u_min);
  write_vec(w, p.u_max);
  write_vec(w, p.in_mean);
  write_vec(w, p.in_std);
  write_vec(w, p.out_mean);
  write_vec(w, p.out_std);
  write_vec(w, p.out_scale);
  w.uint<std::uint64_t>(static_cast<std::uint64_t>(p.theta.size()));
  write_vec(w, p.theta);
  return w.data();
}

ModelParams checkpoint_decode(const std::vector<char>& bytes, std::optional<EnvId> expected_env,
                              std::optional<int> expected_feature_dim) {
  io::ByteReader r(bytes);
  if (r.bytes(7) != std::string_view(kCheckpointMagic, 7)) throw FormatError("not a MISONET checkpoint");
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion) throw VersionError(version, kCheckpointVersion);
  ModelParams p;
  const auto env = r.uint<std::uint8_t>();
  if (env > static_cast<std::uint8_t>(EnvId::driving)) throw FormatError("unknown env_id in checkpoint");
  p.env_id = static_cast<EnvId>(env);
  if (expected_env && *expected_env != p.env_id)
    throw EnvMismatchError("checkpoint is for " + std::string(to_string(p.env_id)) + ", expected " +
                           std::string(to_string(*expected_env)));
  const auto kind = r.uint<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(LossKind::mix)) throw FormatError("unknown loss kind in checkpoint");
  p.loss_kind = static_cast<LossKind>(kind);
  p.feature_dim = static_cast<int>(r.uint<std::uint32_t>());
  if (expected_feature_dim && *expected_feature_dim != p.feature_dim)
    throw DimensionError("checkpoint feature_dim " + std::to_string(p.feature_dim) + " != expected " +
                         std::to_string(*expected_feature_dim));
  p.horizon = static_cast<int>(r.uint<std::uint32_t>());
  p.control_dim = static_cast<int>(r.uint<std::uint32_t>());
  const auto K = r.uint<std::uint32_t>();
  const auto n_trunk = r.uint<std::uint32_t>();
  if (K == 0 || K > 4096 || n_trunk == 0 || n_trunk > 64) throw FormatError("implausible checkpoint header");
  Eigen::Index cursor = 0;
  for (std::uint32_t i = 0; i < n_trunk; ++i) p.trunk.push_back(read_layer(r, cursor));
  for (std::uint32_t i = 0; i < K; ++i) p.heads.push_back(read_layer(r, cursor));
  const Eigen::Index out = static_cast<Eigen::Index>(p.horizon) * p.control_dim;
  p.u_min = read_vec(r, p.control_dim);
  p.u_max = read_vec(r, p.control_dim);
  p.in_mean = read_vec(r, p.feature_dim);
  p.in_std = read_vec(r, p.feature_dim);
  p.out_mean = read_vec(r, out);
  p.out_std = read_vec(r, out);
  p.out_scale = read_vec(r, out);
  const auto count = r.uint<std::uint64_t>();
  if (static_cast<Eigen::Index>(count) != cursor) throw FormatError("parameter count does not match layer shapes");
  if (count > r.remaining() / 8) throw FormatError("truncated file");
  p.theta = read_vec(r, static_cast<Eigen::Index>(count));
  if (r.remaining() != 0) throw FormatError("trailing bytes in checkpoint");
  try {
    p.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid checkpoint: ") + e.what());
  }
  return p;
}

void checkpoint_save(const ModelParams& params, const std::string& path) {
  io::write_file(path, checkpoint_encode(params));
}

ModelParams checkpoint_load(const std::string& path, std::optional<EnvId> expected_env,
                            std::optional<int> expected_feature_dim) {
  return checkpoint_decode(io::read_file(path), expected_env, expected_feature_dim);
}

}  // namespace miso
