#include "tepose/io.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace tepose {

namespace {

constexpr char kTensorMagic[4] = {'T', 'P', 'R', 'C'};
constexpr char kArchiveMagic[4] = {'T', 'P', 'C', 'K'};
constexpr std::uint32_t kTensorVersion = 1;
constexpr std::uint32_t kArchiveVersion = 1;

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("tensor io: truncated stream");
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const auto len = read_pod<std::uint64_t>(is);
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  if (!is) throw std::runtime_error("tensor io: truncated string");
  return s;
}

void write_tensor(std::ostream& os, const Tensor& t) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) write_pod<std::uint64_t>(os, d);
  if (t.data.size() != t.count()) {
    throw std::runtime_error("tensor io: payload size disagrees with dims");
  }
  os.write(reinterpret_cast<const char*>(t.data.data()),
           static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

Tensor read_tensor(std::istream& is) {
  Tensor t;
  const auto ndims = read_pod<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < ndims; ++i) {
    t.dims.push_back(read_pod<std::uint64_t>(is));
  }
  t.data.resize(t.count());
  is.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  if (!is) throw std::runtime_error("tensor io: truncated payload");
  return t;
}

}  // namespace

std::uint64_t Tensor::count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

void write_tensor_file(const std::string& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.write(kTensorMagic, 4);
  write_pod<std::uint32_t>(os, kTensorVersion);
  write_tensor(os, t);
}

Tensor read_tensor_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != std::string(kTensorMagic, 4)) {
    throw std::runtime_error("bad tensor magic in " + path);
  }
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kTensorVersion) {
    throw std::runtime_error("unsupported tensor version in " + path);
  }
  return read_tensor(is);
}

Tensor tensor_from_matrix(const Eigen::MatrixXd& m) {
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(m.rows()),
            static_cast<std::uint64_t>(m.cols())};
  t.data.resize(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      t.data[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
    }
  }
  return t;
}

Eigen::MatrixXd matrix_from_tensor(const Tensor& t) {
  if (t.dims.size() != 2) throw std::runtime_error("expected rank-2 tensor");
  Eigen::MatrixXd m(t.dims[0], t.dims[1]);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = t.data[static_cast<std::size_t>(r * m.cols() + c)];
    }
  }
  return m;
}

Tensor tensor_from_vectors(const std::vector<Eigen::VectorXd>& rows) {
  Tensor t;
  const std::uint64_t n = rows.size();
  const std::uint64_t d = rows.empty() ? 0 : rows[0].size();
  t.dims = {n, d};
  t.data.reserve(n * d);
  for (const auto& r : rows) {
    if (static_cast<std::uint64_t>(r.size()) != d) {
      throw std::runtime_error("tensor_from_vectors: ragged rows");
    }
    t.data.insert(t.data.end(), r.data(), r.data() + r.size());
  }
  return t;
}

std::vector<Eigen::VectorXd> vectors_from_tensor(const Tensor& t) {
  if (t.dims.size() != 2) throw std::runtime_error("expected rank-2 tensor");
  std::vector<Eigen::VectorXd> rows(t.dims[0]);
  for (std::uint64_t i = 0; i < t.dims[0]; ++i) {
    rows[i] = Eigen::Map<const Eigen::VectorXd>(
        t.data.data() + i * t.dims[1], static_cast<Eigen::Index>(t.dims[1]));
  }
  return rows;
}

void TensorArchive::put_matrix(const std::string& name,
                               const Eigen::MatrixXd& m) {
  tensors[name] = tensor_from_matrix(m);
}

void TensorArchive::put_vector(const std::string& name,
                               const Eigen::VectorXd& v) {
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(v.size())};
  t.data.assign(v.data(), v.data() + v.size());
  tensors[name] = std::move(t);
}

void TensorArchive::put_scalar(const std::string& name, double v) {
  Tensor t;
  t.dims = {1};
  t.data = {v};
  tensors[name] = std::move(t);
}

Eigen::MatrixXd TensorArchive::get_matrix(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw std::runtime_error("archive: missing " + name);
  return matrix_from_tensor(it->second);
}

Eigen::VectorXd TensorArchive::get_vector(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw std::runtime_error("archive: missing " + name);
  return Eigen::Map<const Eigen::VectorXd>(
      it->second.data.data(), static_cast<Eigen::Index>(it->second.data.size()));
}

double TensorArchive::get_scalar(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw std::runtime_error("archive: missing " + name);
  return it->second.data.at(0);
}

bool TensorArchive::contains(const std::string& name) const {
  return tensors.count(name) > 0 || strings.count(name) > 0;
}

void TensorArchive::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.write(kArchiveMagic, 4);
  write_pod<std::uint32_t>(os, kArchiveVersion);
  write_pod<std::uint64_t>(os, tensors.size());
  for (const auto& [name, t] : tensors) {
    write_string(os, name);
    write_tensor(os, t);
  }
  write_pod<std::uint64_t>(os, strings.size());
  for (const auto& [name, s] : strings) {
    write_string(os, name);
    write_string(os, s);
  }
}

TensorArchive TensorArchive::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != std::string(kArchiveMagic, 4)) {
    throw std::runtime_error("bad archive magic in " + path);
  }
  TensorArchive a;
  a.version = read_pod<std::uint32_t>(is);
  if (a.version != kArchiveVersion) {
    throw std::runtime_error("unsupported archive version in " + path);
  }
  const auto n = read_pod<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = read_string(is);
    a.tensors[name] = read_tensor(is);
  }
  const auto ns = read_pod<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < ns; ++i) {
    std::string name = read_string(is);
    a.strings[name] = read_string(is);
  }
  return a;
}

namespace {

Tensor tensor_from_frames(const std::vector<Eigen::MatrixXd>& frames) {
  Tensor t;
  const std::uint64_t f = frames.size();
  const std::uint64_t r = frames.empty() ? 0 : frames[0].rows();
  const std::uint64_t c = frames.empty() ? 0 : frames[0].cols();
  t.dims = {f, r, c};
  t.data.reserve(f * r * c);
  for (const auto& m : frames) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) t.data.push_back(m(i, j));
    }
  }
  return t;
}

std::vector<Eigen::MatrixXd> frames_from_tensor(const Tensor& t) {
  if (t.dims.size() != 3) throw std::runtime_error("expected rank-3 tensor");
  std::vector<Eigen::MatrixXd> frames(t.dims[0]);
  const std::uint64_t r = t.dims[1], c = t.dims[2];
  for (std::uint64_t f = 0; f < t.dims[0]; ++f) {
    Eigen::MatrixXd m(r, c);
    for (std::uint64_t i = 0; i < r; ++i) {
      for (std::uint64_t j = 0; j < c; ++j) {
        m(i, j) = t.data[(f * r + i) * c + j];
      }
    }
    frames[f] = std::move(m);
  }
  return frames;
}

}  // namespace

void write_dataset(const std::string& dir,
                   const std::vector<VideoRecord>& videos, int num_joints) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["num_joints"] = num_joints;
  manifest["feature_dim"] =
      videos.empty() ? 0 : static_cast<int>(videos[0].static_feats[0].size());
  auto arr = nlohmann::json::array();
  for (const auto& v : videos) {
    v.validate();
    nlohmann::json jv;
    jv["id"] = v.id;
    jv["length"] = v.length;
    jv["has_3d"] = v.flags.has_3d;
    jv["has_smpl"] = v.flags.has_smpl;
    arr.push_back(jv);
    const std::string base = dir + "/" + v.id;
    write_tensor_file(base + ".feat.bin", tensor_from_vectors(v.static_feats));
    write_tensor_file(base + ".joints2d.bin", tensor_from_frames(v.gt_joints2d));
    if (!v.gt_params.empty()) {
      write_tensor_file(base + ".params.bin", tensor_from_vectors(v.gt_params));
    }
    if (!v.gt_joints3d.empty()) {
      write_tensor_file(base + ".joints3d.bin",
                        tensor_from_frames(v.gt_joints3d));
    }
  }
  manifest["videos"] = arr;
  std::ofstream os(dir + "/dataset.json");
  os << manifest.dump(2) << "\n";
}

DatasetOnDisk read_dataset(const std::string& dir) {
  std::ifstream is(dir + "/dataset.json");
  if (!is) throw std::runtime_error("cannot open dataset manifest in " + dir);
  nlohmann::json manifest;
  is >> manifest;
  DatasetOnDisk ds;
  ds.num_joints = manifest.at("num_joints").get<int>();
  ds.feature_dim = manifest.at("feature_dim").get<int>();
  for (const auto& jv : manifest.at("videos")) {
    VideoRecord v;
    v.id = jv.at("id").get<std::string>();
    v.length = jv.at("length").get<int>();
    v.flags.has_3d = jv.at("has_3d").get<bool>();
    v.flags.has_smpl = jv.at("has_smpl").get<bool>();
    const std::string base = dir + "/" + v.id;
    v.static_feats = vectors_from_tensor(read_tensor_file(base + ".feat.bin"));
    v.gt_joints2d = frames_from_tensor(read_tensor_file(base + ".joints2d.bin"));
    if (std::filesystem::exists(base + ".params.bin")) {
      v.gt_params = vectors_from_tensor(read_tensor_file(base + ".params.bin"));
    }
    if (std::filesystem::exists(base + ".joints3d.bin")) {
      v.gt_joints3d =
          frames_from_tensor(read_tensor_file(base + ".joints3d.bin"));
    }
    v.validate();
    const int idx = static_cast<int>(ds.videos.size());
    (v.flags.has_3d ? ds.pool_3d : ds.pool_2d).push_back(idx);
    ds.videos.push_back(std::move(v));
  }
  return ds;
}

void write_real_pool(const std::string& path,
                     const std::vector<FeatureSeq>& windows) {
  Tensor t;
  const std::uint64_t w = windows.size();
  const std::uint64_t f = windows.empty() ? 0 : windows[0].size();
  const std::uint64_t n = windows.empty() ? 0 : windows[0][0].rows();
  const std::uint64_t c = windows.empty() ? 0 : windows[0][0].cols();
  t.dims = {w, f, n, c};
  t.data.reserve(w * f * n * c);
  for (const auto& win : windows) {
    for (const auto& m : win) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) t.data.push_back(m(i, j));
      }
    }
  }
  write_tensor_file(path, t);
}

std::vector<FeatureSeq> read_real_pool(const std::string& path) {
  const Tensor t = read_tensor_file(path);
  if (t.dims.size() != 4) throw std::runtime_error("real pool: expected rank 4");
  const std::uint64_t w = t.dims[0], f = t.dims[1], n = t.dims[2], c = t.dims[3];
  std::vector<FeatureSeq> windows(w);
  std::uint64_t idx = 0;
  for (std::uint64_t wi = 0; wi < w; ++wi) {
    windows[wi].resize(f);
    for (std::uint64_t fi = 0; fi < f; ++fi) {
      Eigen::MatrixXd m(n, c);
      for (std::uint64_t i = 0; i < n; ++i) {
        for (std::uint64_t j = 0; j < c; ++j) m(i, j) = t.data[idx++];
      }
      windows[wi][fi] = std::move(m);
    }
  }
  return windows;
}

}  // namespace tepose
