#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tepose/gcn.hpp"
#include "tepose/loader.hpp"

namespace tepose {

// Little-endian binary tensor: magic, version, dims, f64 payload.
struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> data;  // row-major

  std::uint64_t count() const;
};

void write_tensor_file(const std::string& path, const Tensor& t);
Tensor read_tensor_file(const std::string& path);

Tensor tensor_from_matrix(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_tensor(const Tensor& t);
Tensor tensor_from_vectors(const std::vector<Eigen::VectorXd>& rows);
std::vector<Eigen::VectorXd> vectors_from_tensor(const Tensor& t);

// Ordered name -> tensor container used for checkpoints; round-trips
// bitwise.
struct TensorArchive {
  std::uint32_t version = 1;
  std::map<std::string, Tensor> tensors;
  std::map<std::string, std::string> strings;

  void put_matrix(const std::string& name, const Eigen::MatrixXd& m);
  void put_vector(const std::string& name, const Eigen::VectorXd& v);
  void put_scalar(const std::string& name, double v);
  Eigen::MatrixXd get_matrix(const std::string& name) const;
  Eigen::VectorXd get_vector(const std::string& name) const;
  double get_scalar(const std::string& name) const;
  bool contains(const std::string& name) const;

  void save(const std::string& path) const;
  static TensorArchive load(const std::string& path);
};

// Dataset directory: skeleton.json, dataset.json manifest, per-video
// binary records, optional real-motion pool.
struct DatasetOnDisk {
  std::vector<VideoRecord> videos;
  std::vector<int> pool_3d;  // indices into videos
  std::vector<int> pool_2d;
  int feature_dim = 0;
  int num_joints = 0;
};

void write_dataset(const std::string& dir, const std::vector<VideoRecord>& videos,
                   int num_joints);
DatasetOnDisk read_dataset(const std::string& dir);

void write_real_pool(const std::string& path,
                     const std::vector<FeatureSeq>& windows);
std::vector<FeatureSeq> read_real_pool(const std::string& path);

}  // namespace tepose
