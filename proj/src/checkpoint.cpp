#include "motifrgc/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "motifrgc/errors.hpp"

namespace motifrgc {

namespace {

constexpr char kMagic[8] = {'M', 'O', 'T', 'I', 'F', 'R', 'G', 'C'};

// Calls f(name, object) for every dense block of the model in a fixed order.
template <typename Model, typename F>
void visit_blocks(Model& model, F&& f) {
  auto& enc = model.encoder;
  f("curvature.log_magnitude", enc.curvature.log_magnitude);
  f("magnitudes", enc.magnitudes);
  for (std::size_t m = 0; m < enc.factor_points.size(); ++m) {
    const std::string p = "factor" + std::to_string(m) + ".";
    f(p + "points", enc.factor_points[m]);
    f(p + "basis.phases", enc.factor_bases[m].phases);
    f(p + "basis.biases", enc.factor_bases[m].biases);
    f(p + "basis.frequencies", enc.factor_bases[m].frequencies);
  }
  f("euclid.basis.phases", enc.euclid_basis.phases);
  f("euclid.basis.biases", enc.euclid_basis.biases);
  f("euclid.basis.frequencies", enc.euclid_basis.frequencies);
  f("euclid.kernel", enc.euclid_kernel);
  auto dense = [&](const std::string& p, auto& layer) {
    f(p + ".weight", layer.weight);
    f(p + ".bias", layer.bias);
  };
  for (std::size_t v = 0; v < enc.conv.size(); ++v) {
    dense("conv" + std::to_string(v) + ".first", enc.conv[v].first);
    dense("conv" + std::to_string(v) + ".second", enc.conv[v].second);
  }
  dense("projector.first", enc.projector.first);
  dense("projector.second", enc.projector.second);
  dense("discriminator.hidden1", model.discriminator.hidden1);
  dense("discriminator.hidden2", model.discriminator.hidden2);
  dense("discriminator.output", model.discriminator.output);
}

void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

template <typename T>
T read_pod(std::istream& in, const std::filesystem::path& file) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw CheckpointError(file.string() + ": truncated header");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt) {
  const EncoderState& enc = ckpt.model.encoder;
  Json header;
  header["format"] = "motifrgc-checkpoint";
  header["config"] = to_json(ckpt.config);
  header["seed"] = ckpt.seed;
  // NaN (no validation edges) is stored as null
  header["best_valid_auc"] =
      std::isfinite(ckpt.best_valid_auc) ? Json(ckpt.best_valid_auc) : Json(nullptr);
  header["best_iteration"] = ckpt.best_iteration;
  header["num_nodes"] = enc.num_nodes();
  header["diversified_dim"] = enc.spec.diversified.dim;
  header["decoder"] = {{"r", ckpt.model.decoder.r}, {"t", ckpt.model.decoder.t}};
  Json bases = Json::array();
  for (const auto& b : enc.factor_bases) {
    bases.push_back({{"seed", b.seed}, {"curvature", b.curvature ? Json(*b.curvature) : Json(nullptr)}});
  }
  header["factor_bases"] = bases;
  header["euclid_basis_seed"] = enc.euclid_basis.seed;

  Json blocks = Json::array();
  std::vector<std::pair<const double*, std::size_t>> payload;
  visit_blocks(ckpt.model, [&](const std::string& name, const auto& obj) {
    blocks.push_back({{"name", name}, {"rows", obj.rows()}, {"cols", obj.cols()}});
    payload.emplace_back(obj.data(), static_cast<std::size_t>(obj.size()));
  });
  header["blocks"] = blocks;

  const std::string text = header.dump();
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + file.string());
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kCheckpointVersion);
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [data, n] : payload) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  }
  if (!out) throw CheckpointError("failed writing checkpoint " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + file.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw CheckpointError(file.string() + ": not a checkpoint file");
  }
  const auto version = read_pod<std::uint32_t>(in, file);
  if (version != kCheckpointVersion) {
    throw CheckpointError(file.string() + ": checkpoint version " + std::to_string(version) +
                          " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto length = read_pod<std::uint64_t>(in, file);
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw CheckpointError(file.string() + ": truncated header");
  }

  Checkpoint ckpt;
  std::size_t next = 0;
  try {
    const Json header = Json::parse(text);
    ckpt.config = run_config_from_json(header.at("config"));
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    const auto& best = header.at("best_valid_auc");
    ckpt.best_valid_auc = best.is_null() ? std::numeric_limits<double>::quiet_NaN() : best.get<double>();
    ckpt.best_iteration = header.at("best_iteration").get<int>();
    ckpt.model.decoder = {header.at("decoder").at("r").get<double>(), header.at("decoder").at("t").get<double>()};

    EncoderState& enc = ckpt.model.encoder;
    enc.config = ckpt.config.train.encoder;
    enc.config.seed = ckpt.seed;
    enc.spec.factors = enc.config.factors;
    enc.spec.diversified.dim = header.at("diversified_dim").get<int>();
    for (const auto& f : enc.config.factors) enc.curvature.signs.push_back(f.curvature > 0 ? 1 : -1);
    const std::size_t factors = enc.config.factors.size();
    enc.factor_points.resize(factors);
    enc.factor_bases.resize(factors);
    const Json& bases = header.at("factor_bases");
    if (bases.size() != factors) throw CheckpointError("factor count mismatch");
    for (std::size_t m = 0; m < factors; ++m) {
      enc.factor_bases[m].seed = bases[m].at("seed").get<std::uint64_t>();
      if (!bases[m].at("curvature").is_null()) enc.factor_bases[m].curvature = bases[m].at("curvature").get<double>();
    }
    enc.euclid_basis.seed = header.at("euclid_basis_seed").get<std::uint64_t>();
    enc.conv.resize(factors + 1);

    const Json& blocks = header.at("blocks");
    visit_blocks(ckpt.model, [&](const std::string& name, auto& obj) {
      if (next >= blocks.size() || blocks[next].at("name").get<std::string>() != name) {
        throw CheckpointError(file.string() + ": block table does not match the model layout at '" + name + "'");
      }
      const auto rows = blocks[next].at("rows").get<Eigen::Index>();
      const auto cols = blocks[next].at("cols").get<Eigen::Index>();
      obj.resize(rows, cols);
      if (!in.read(reinterpret_cast<char*>(obj.data()), static_cast<std::streamsize>(obj.size() * sizeof(double)))) {
        throw CheckpointError(file.string() + ": truncated payload in block '" + name + "'");
      }
      ++next;
    });
    if (next != blocks.size()) throw CheckpointError(file.string() + ": extra blocks in checkpoint");
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(file.string() + ": malformed header: " + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(file.string() + ": invalid stored config: " + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError(file.string() + ": trailing bytes");
  return ckpt;
}

std::uint64_t file_hash(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + file.string());
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace motifrgc
