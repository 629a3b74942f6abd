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

#include "miso/core/dataset.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "miso/core/binary_io.hpp"
#include "miso/core/error.hpp"

namespace miso {

namespace {

constexpr std::uint8_t kFlagOracleNotBetter = 1U;

bool uses_reference(EnvId id) { return id == EnvId::driving; }

void check_shape(const DatasetHeader& h, const DatasetRecord& r) {
  const auto H = static_cast<Eigen::Index>(h.horizon);
  const auto n = static_cast<Eigen::Index>(h.state_dim);
  const auto m = static_cast<Eigen::Index>(h.control_dim);
  const auto& psi = r.instance;
  if (psi.env_id != h.env_id) throw EnvMismatchError("dataset records must share env_id");
  if (psi.x0.size() != n) throw DimensionError("record x0 has wrong dimension");
  if (uses_reference(h.env_id)) {
    if (!psi.reference || psi.reference->rows() != H || psi.reference->cols() != n)
      throw DimensionError("record reference must be H x n");
  } else if (!psi.goal || psi.goal->size() != n) {
    throw DimensionError("record goal has wrong dimension");
  }
  auto check_controls = [&](const ControlSequence& u) {
    if (u.controls.rows() != H || u.controls.cols() != m) throw DimensionError("record controls must be H x m");
  };
  check_controls(r.warm_start);
  check_controls(r.oracle_controls);
  if (r.oracle_states.rows() != H + 1 || r.oracle_states.cols() != n)
    throw DimensionError("record oracle_states must be (H+1) x n");
}

// Matrices are serialized row-major so the layout matches "H rows of m".
void write_matrix(io::ByteWriter& w, const Matrix& mat) {
  for (Eigen::Index i = 0; i < mat.rows(); ++i)
    for (Eigen::Index j = 0; j < mat.cols(); ++j) w.f64(mat(i, j));
}

Matrix read_matrix(io::ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
  Matrix mat(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) mat(i, j) = r.f64();
  return mat;
}

DatasetHeader shape_of(const DatasetRecord& r) {
  DatasetHeader h;
  h.env_id = r.instance.env_id;
  h.horizon = static_cast<std::uint32_t>(r.warm_start.horizon());
  h.state_dim = static_cast<std::uint32_t>(r.instance.x0.size());
  h.control_dim = static_cast<std::uint32_t>(r.warm_start.dim());
  return h;
}

}  // namespace

std::vector<char> dataset_encode(const DatasetHeader& shape, const std::vector<DatasetRecord>& records) {
  DatasetHeader h = shape;
  h.count = records.size();
  for (const auto& r : records) check_shape(h, r);

  io::ByteWriter w;
  w.bytes(std::string_view(kDatasetMagic, 8));
  w.uint<std::uint32_t>(kDatasetVersion);
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(h.env_id));
  w.uint<std::uint32_t>(h.horizon);
  w.uint<std::uint32_t>(h.state_dim);
  w.uint<std::uint32_t>(h.control_dim);
  w.uint<std::uint64_t>(h.count);
  for (const auto& r : records) {
    w.uint<std::uint32_t>(r.instance.instance_id);
    w.uint<std::uint64_t>(r.instance.seed);
    w.uint<std::uint8_t>(r.oracle_not_better ? kFlagOracleNotBetter : 0U);
    w.f64s({r.instance.x0.data(), static_cast<std::size_t>(r.instance.x0.size())});
    if (uses_reference(h.env_id)) {
      write_matrix(w, *r.instance.reference);
    } else {
      w.f64s({r.instance.goal->data(), static_cast<std::size_t>(r.instance.goal->size())});
    }
    write_matrix(w, r.warm_start.controls);
    write_matrix(w, r.oracle_controls.controls);
    write_matrix(w, r.oracle_states);
    w.f64(r.oracle_cost);
  }
  return w.data();
}

Dataset dataset_decode(const std::vector<char>& bytes, std::optional<EnvId> expected_env) {
  io::ByteReader r(bytes);
  if (r.bytes(8) != std::string_view(kDatasetMagic, 8)) throw FormatError("not a MISODATA file");
  Dataset ds;
  auto& h = ds.header;
  h.version = r.uint<std::uint32_t>();
  if (h.version != kDatasetVersion) throw VersionError(h.version, kDatasetVersion);
  const auto env_byte = r.uint<std::uint8_t>();
  if (env_byte > static_cast<std::uint8_t>(EnvId::driving)) throw FormatError("unknown env_id in dataset header");
  h.env_id = static_cast<EnvId>(env_byte);
  if (expected_env && *expected_env != h.env_id)
    throw EnvMismatchError("dataset is for " + std::string(to_string(h.env_id)) + ", expected " +
                           std::string(to_string(*expected_env)));
  h.horizon = r.uint<std::uint32_t>();
  h.state_dim = r.uint<std::uint32_t>();
  h.control_dim = r.uint<std::uint32_t>();
  h.count = r.uint<std::uint64_t>();

  const auto H = static_cast<Eigen::Index>(h.horizon);
  const auto n = static_cast<Eigen::Index>(h.state_dim);
  const auto m = static_cast<Eigen::Index>(h.control_dim);
  const std::size_t target_size = uses_reference(h.env_id) ? h.horizon * h.state_dim : h.state_dim;
  const std::size_t record_bytes =
      4 + 8 + 1 + 8 * (h.state_dim + target_size + 2 * h.horizon * h.control_dim + (h.horizon + 1) * h.state_dim + 1);
  if (h.count > r.remaining() / record_bytes) throw FormatError("truncated file: header declares more records than present");

  ds.records.reserve(h.count);
  for (std::uint64_t i = 0; i < h.count; ++i) {
    DatasetRecord rec;
    auto& psi = rec.instance;
    psi.env_id = h.env_id;
    psi.instance_id = r.uint<std::uint32_t>();
    psi.seed = r.uint<std::uint64_t>();
    rec.oracle_not_better = (r.uint<std::uint8_t>() & kFlagOracleNotBetter) != 0;
    psi.x0 = read_matrix(r, n, 1);
    if (uses_reference(h.env_id)) {
      psi.reference = read_matrix(r, H, n);
    } else {
      psi.goal = Vector(read_matrix(r, n, 1));
    }
    rec.warm_start = ControlSequence(read_matrix(r, H, m));
    rec.oracle_controls = ControlSequence(read_matrix(r, H, m));
    rec.oracle_states = read_matrix(r, H + 1, n);
    rec.oracle_cost = r.f64();
    ds.records.push_back(std::move(rec));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after last record");
  return ds;
}

void dataset_write(const std::string& path, const DatasetHeader& shape, const std::vector<DatasetRecord>& records) {
  const auto bytes = dataset_encode(shape, records);
  io::write_file(path, bytes);
  nlohmann::json manifest = {{"format", "MISODATA"},
                             {"version", kDatasetVersion},
                             {"env", std::string(to_string(shape.env_id))},
                             {"H", shape.horizon},
                             {"n", shape.state_dim},
                             {"m", shape.control_dim},
                             {"count", records.size()}};
  std::ofstream(path + ".json") << manifest.dump(2) << '\n';
}

void dataset_write(const std::string& path, const std::vector<DatasetRecord>& records) {
  if (records.empty()) throw DimensionError("dataset_write: empty record list needs an explicit shape");
  dataset_write(path, shape_of(records.front()), records);
}

Dataset dataset_read(const std::string& path, std::optional<EnvId> expected_env) {
  return dataset_decode(io::read_file(path), expected_env);
}

}  // namespace miso
