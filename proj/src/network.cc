#include "tickx/network.h"

#include <cstring>

#include "tickx/io.h"
#include "tickx/trainer.h"

namespace tickx {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam betas must be in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must be in [0, 1)");
  }
  if (!(init_scale > 0.0)) throw ConfigError("init_scale must be > 0");
}

namespace {

constexpr char kMagic[8] = {'T', 'I', 'C', 'K', 'X', 'N', 'E', 'T'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_tensor(const Eigen::MatrixXd &m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(m(i, j));
  }
  void put_tensor(const Eigen::VectorXd &v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) put<double>(v(i));
  }
  const std::string &data() const { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(std::string data, std::string origin)
      : data_(std::move(data)), origin_(std::move(origin)) {}

  template <typename T>
  T take() {
    if (pos_ + sizeof(T) > data_.size()) throw IoError(origin_ + ": truncated checkpoint");
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  void take_tensor(Eigen::MatrixXd &m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = take<double>();
  }
  void take_tensor(Eigen::VectorXd &v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = take<double>();
  }
  void expect_end() const {
    if (pos_ != data_.size()) throw IoError(origin_ + ": trailing bytes in checkpoint");
  }

 private:
  std::string data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

struct Header {
  ModelKind kind;
  std::uint32_t dims[5];
};

void write_header(Writer &w, ModelKind kind, std::initializer_list<int> dims) {
  for (char c : kMagic) w.put<char>(c);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(kind));
  for (int d : dims) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
}

Header read_header(Reader &r, const std::string &origin) {
  char magic[8];
  for (char &c : magic) c = r.take<char>();
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError(origin + ": not a checkpoint");
  }
  const auto version = r.take<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw IoError(origin + ": unsupported checkpoint version " + std::to_string(version));
  }
  Header h;
  h.kind = static_cast<ModelKind>(r.take<std::uint32_t>());
  for (auto &d : h.dims) d = r.take<std::uint32_t>();
  return h;
}

}  // namespace

void save_checkpoint(const NetworkParams<double> &params,
                     const std::filesystem::path &path) {
  Writer w;
  write_header(w, ModelKind::kCharLstm,
               {params.input_size(), params.hidden_size(), params.global_dim(),
                params.global_hidden(), 0});
  zip_tensors([&](const auto &t) { w.put_tensor(t); }, params);
  write_file(path, w.data());
}

NetworkParams<double> load_checkpoint(const std::filesystem::path &path) {
  Reader r(read_file(path), path.string());
  const Header h = read_header(r, path.string());
  if (h.kind != ModelKind::kCharLstm) {
    throw IoError(path.string() + ": checkpoint holds a different model kind");
  }
  auto params = NetworkParams<double>::zeros(
      static_cast<int>(h.dims[0]), static_cast<int>(h.dims[1]),
      static_cast<int>(h.dims[2]), static_cast<int>(h.dims[3]));
  zip_tensors([&](auto &t) { r.take_tensor(t); }, params);
  r.expect_end();
  return params;
}

void save_checkpoint(const NgramParams<double> &params,
                     const std::filesystem::path &path) {
  Writer w;
  write_header(w, ModelKind::kNgramBaseline,
               {0, 0, 0, params.hidden_dim(), params.input_dim()});
  zip_tensors([&](const auto &t) { w.put_tensor(t); }, params);
  write_file(path, w.data());
}

NgramParams<double> load_baseline_checkpoint(const std::filesystem::path &path) {
  Reader r(read_file(path), path.string());
  const Header h = read_header(r, path.string());
  if (h.kind != ModelKind::kNgramBaseline) {
    throw IoError(path.string() + ": checkpoint holds a different model kind");
  }
  auto params = NgramParams<double>::zeros(static_cast<int>(h.dims[4]),
                                           static_cast<int>(h.dims[3]));
  zip_tensors([&](auto &t) { r.take_tensor(t); }, params);
  r.expect_end();
  return params;
}

}  // namespace tickx
