#include "diffu/toy/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "diffu/common/error.hpp"

namespace diffu::toy {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'D', 'I', 'F', 'F', 'U', 'C', 'K', 'P'};

nlohmann::json metadata(const Checkpoint& ck) {
  return {{"format", "diffu-checkpoint"},
          {"version", ck.version},
          {"net", ck.net.to_json()},
          {"schedule", ck.schedule.to_json()},
          {"config", ck.config.to_json()},
          {"data_variance", ck.data_variance},
          {"final_loss", ck.final_loss},
          {"epoch_losses", ck.epoch_losses}};
}

Checkpoint from_metadata(const nlohmann::json& j) {
  const auto version = j.at("version").get<std::uint32_t>();
  if (version != Checkpoint::kFormatVersion) {
    fail_validation("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(Checkpoint::kFormatVersion) + ")");
  }
  Checkpoint ck;
  ck.version = version;
  ck.net = MlpScoreNet::from_json(j.at("net"));
  ck.schedule = NoiseSchedule::from_json(j.at("schedule"));
  ck.config = TrainConfig::from_json(j.at("config"));
  ck.data_variance = j.at("data_variance").get<double>();
  ck.final_loss = j.at("final_loss").get<double>();
  ck.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
  return ck;
}

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string r = s_.substr(pos_, n);
    pos_ += n;
    return r;
  }
  void read_doubles(double* dst, std::size_t n) {
    need(n * sizeof(double));
    std::memcpy(dst, s_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (s_.size() - pos_ < n) fail_validation("checkpoint is truncated");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck, CheckpointFormat format) {
  const Vector& p = ck.net.params();
  if (format == CheckpointFormat::kJson) {
    nlohmann::json j = metadata(ck);
    j["params"] = std::vector<double>(p.data(), p.data() + p.size());
    return j.dump(1) + "\n";
  }
  const std::string meta = metadata(ck).dump();
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, ck.version);
  put<std::uint64_t>(out, meta.size());
  out += meta;
  put<std::uint64_t>(out, static_cast<std::uint64_t>(p.size()));
  out.append(reinterpret_cast<const char*>(p.data()), static_cast<std::size_t>(p.size()) * sizeof(double));
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() >= sizeof(kMagic) && std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0) {
    Reader r(bytes);
    r.bytes(sizeof(kMagic));
    const auto version = r.get<std::uint32_t>();
    if (version != Checkpoint::kFormatVersion) {
      fail_validation("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(Checkpoint::kFormatVersion) + ")");
    }
    const auto meta_len = r.get<std::uint64_t>();
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(r.bytes(meta_len));
    } catch (const nlohmann::json::exception& e) {
      fail_validation(std::string("checkpoint metadata is corrupt: ") + e.what());
    }
    Checkpoint ck = from_metadata(meta);
    const auto count = r.get<std::uint64_t>();
    if (count != static_cast<std::uint64_t>(ck.net.parameter_count())) {
      fail_validation("checkpoint parameter count does not match its architecture");
    }
    r.read_doubles(ck.net.params().data(), count);
    if (!r.done()) fail_validation("checkpoint has trailing bytes");
    return ck;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception&) {
    fail_validation("not a checkpoint: bad magic and not valid JSON (file may be truncated)");
  }
  if (!j.is_object() || j.value("format", "") != "diffu-checkpoint") fail_validation("not a checkpoint document");
  Checkpoint ck = from_metadata(j);
  const auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != static_cast<std::size_t>(ck.net.parameter_count())) {
    fail_validation("checkpoint parameter count does not match its architecture");
  }
  std::memcpy(ck.net.params().data(), params.data(), params.size() * sizeof(double));
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path, CheckpointFormat format) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write checkpoint '" + path + "'");
  const std::string bytes = serialize_checkpoint(ck, format);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail_validation("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace diffu::toy
