#include "xsql/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace xsql {

namespace {

constexpr char kMagic[8] = {'X', 'S', 'Q', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint8_t kVersion = 1;

void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ostream& out, T v) {
  write_bytes(out, &v, sizeof(T));
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  write_bytes(out, s.data(), s.size());
}

void write_f32_array(std::ostream& out, const std::vector<Real>& values) {
  for (Real v : values) write_pod<float>(out, static_cast<float>(v));
}

void write_tensor(std::ostream& out, const Tensor& t) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
  for (int dim : t.shape) write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  write_f32_array(out, t.values);
}

void read_bytes(std::istream& in, void* data, std::size_t n, const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw std::runtime_error(std::string("checkpoint: truncated while reading ") + what);
  }
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T v;
  read_bytes(in, &v, sizeof(T), what);
  return v;
}

std::string read_string(std::istream& in, const char* what) {
  auto n = read_pod<std::uint32_t>(in, what);
  std::string s(n, '\0');
  if (n > 0) read_bytes(in, s.data(), n, what);
  return s;
}

Tensor read_tensor(std::istream& in, const char* what) {
  auto rank = read_pod<std::uint32_t>(in, what);
  std::vector<int> shape;
  for (std::uint32_t i = 0; i < rank; ++i) {
    shape.push_back(static_cast<int>(read_pod<std::uint32_t>(in, what)));
  }
  Tensor t = Tensor::zeros(shape);
  for (Real& v : t.values) v = static_cast<Real>(read_pod<float>(in, what));
  return t;
}

}  // namespace

void quantize_to_f32(Tensor& t) {
  for (Real& v : t.values) v = static_cast<Real>(static_cast<float>(v));
}

void quantize_store_to_f32(ParameterStore& store) {
  for (std::size_t i = 0; i < store.count(); ++i) quantize_to_f32(store.at(i).value);
}

void save_checkpoint(const std::string& path, const CheckpointData& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  write_bytes(out, kMagic, sizeof(kMagic));
  write_pod<std::uint8_t>(out, kVersion);
  write_string(out, data.config_text);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(data.vocab_tokens.size()));
  for (const auto& tok : data.vocab_tokens) write_string(out, tok);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(data.params.size()));
  for (const auto& [name, tensor] : data.params) {
    write_string(out, name);
    write_tensor(out, tensor);
  }
  if (data.trainer) {
    write_pod<std::uint8_t>(out, 1);
    write_pod<std::int64_t>(out, data.trainer->adam_t);
    write_pod<std::int32_t>(out, data.trainer->next_epoch);
    write_pod<double>(out, data.trainer->best_dev_acc);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(data.trainer->adam_m.size()));
    for (const Tensor& t : data.trainer->adam_m) write_tensor(out, t);
    for (const Tensor& t : data.trainer->adam_v) write_tensor(out, t);
  } else {
    write_pod<std::uint8_t>(out, 0);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[sizeof(kMagic)];
  read_bytes(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  auto version = read_pod<std::uint8_t>(in, "version");
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  CheckpointData data;
  data.config_text = read_string(in, "config");
  auto n_tokens = read_pod<std::uint32_t>(in, "vocab size");
  for (std::uint32_t i = 0; i < n_tokens; ++i) {
    data.vocab_tokens.push_back(read_string(in, "vocab token"));
  }
  auto n_params = read_pod<std::uint32_t>(in, "parameter count");
  for (std::uint32_t i = 0; i < n_params; ++i) {
    std::string name = read_string(in, "parameter name");
    Tensor t = read_tensor(in, "parameter tensor");
    data.params.emplace_back(std::move(name), std::move(t));
  }
  auto has_trainer = read_pod<std::uint8_t>(in, "trainer flag");
  if (has_trainer == 1) {
    TrainerState ts;
    ts.adam_t = read_pod<std::int64_t>(in, "adam step");
    ts.next_epoch = read_pod<std::int32_t>(in, "epoch");
    ts.best_dev_acc = read_pod<double>(in, "best dev accuracy");
    auto n = read_pod<std::uint32_t>(in, "adam state count");
    for (std::uint32_t i = 0; i < n; ++i) ts.adam_m.push_back(read_tensor(in, "adam m"));
    for (std::uint32_t i = 0; i < n; ++i) ts.adam_v.push_back(read_tensor(in, "adam v"));
    data.trainer = std::move(ts);
  } else if (has_trainer != 0) {
    throw std::runtime_error("checkpoint: bad trainer flag");
  }
  return data;
}

void restore_parameters(ParameterStore& store, const CheckpointData& data) {
  if (data.params.size() != store.count()) {
    throw std::runtime_error("checkpoint: parameter count mismatch: file has " +
                             std::to_string(data.params.size()) + ", model has " +
                             std::to_string(store.count()));
  }
  for (std::size_t i = 0; i < store.count(); ++i) {
    Parameter& p = store.at(i);
    const auto& [name, tensor] = data.params[i];
    if (p.name != name) {
      throw std::runtime_error("checkpoint: parameter " + std::to_string(i) + " is '" + name +
                               "', model expects '" + p.name + "'");
    }
    if (!p.value.same_shape(tensor)) {
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    }
    p.value = tensor;
  }
}

std::vector<std::pair<std::string, Tensor>> snapshot_parameters(const ParameterStore& store) {
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) {
    out.emplace_back(store.at(i).name, store.at(i).value);
  }
  return out;
}

}  // namespace xsql
