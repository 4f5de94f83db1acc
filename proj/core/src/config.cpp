#include "beamprune/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "beamprune/types.hpp"

namespace beamprune {

bool PruneConfig::is_neutral() const noexcept {
  return rp == 0.0 && ap == kInfinity && rpl == 0.0 && !mc.has_value();
}

PruneConfig neutral_prune_config() noexcept { return PruneConfig{}; }

std::size_t DecodeConfig::length_cap(std::size_t source_len) const noexcept {
  const double cap =
      std::floor(max_len_factor * static_cast<double>(source_len) +
                 static_cast<double>(max_len_offset));
  if (!(cap >= 1.0)) return 1;
  return static_cast<std::size_t>(cap);
}

void validate_prune_config(const PruneConfig& cfg) {
  if (!(cfg.rp >= 0.0 && cfg.rp < 1.0)) throw ConfigError("rp", "must be in [0, 1)");
  if (!(cfg.ap > 0.0)) throw ConfigError("ap", "must be > 0");
  if (!(cfg.rpl >= 0.0 && cfg.rpl < 1.0)) throw ConfigError("rpl", "must be in [0, 1)");
  if (cfg.mc && *cfg.mc < 1) throw ConfigError("mc", "must be >= 1 or unlimited");
}

void validate_config(const DecodeConfig& cfg) {
  validate_prune_config(cfg.prune);
  if (cfg.beam_size && *cfg.beam_size < 1) {
    throw ConfigError("beam_size", "must be >= 1 or unbounded");
  }
  if (!cfg.beam_size && cfg.prune.is_neutral()) {
    throw ConfigError("beam_size", "unbounded beam requires at least one pruning threshold");
  }
  if (!(cfg.max_len_factor >= 0.0) || !std::isfinite(cfg.max_len_factor)) {
    throw ConfigError("max_len_factor", "must be finite and >= 0");
  }
  if (cfg.max_len_offset < 1) throw ConfigError("max_len_offset", "must be >= 1");
  if (cfg.unbounded_cap < 1) throw ConfigError("unbounded_cap", "must be >= 1");
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

std::string prune_label(const PruneConfig& cfg) {
  if (cfg.is_neutral()) return "no pruning";
  std::string out;
  auto add = [&out](const std::string& item) {
    if (!out.empty()) out += ',';
    out += item;
  };
  if (cfg.rp != 0.0) add("rp=" + format_number(cfg.rp));
  if (cfg.ap != kInfinity) add("ap=" + format_number(cfg.ap));
  if (cfg.rpl != 0.0) add("rpl=" + format_number(cfg.rpl));
  if (cfg.mc) add("mc=" + std::to_string(*cfg.mc));
  return out;
}

namespace {

double read_number(const nlohmann::json& j, const char* field) {
  if (j.is_number()) return j.get<double>();
  throw ConfigError(field, "expected a number");
}

std::size_t read_count(const nlohmann::json& j, const char* field) {
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::size_t>();
  throw ConfigError(field, "expected a non-negative integer");
}

void read_prune_fields(const nlohmann::json& j, PruneConfig& cfg) {
  if (auto it = j.find("rp"); it != j.end()) cfg.rp = read_number(*it, "rp");
  if (auto it = j.find("rpl"); it != j.end()) cfg.rpl = read_number(*it, "rpl");
  if (auto it = j.find("ap"); it != j.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "inf") throw ConfigError("ap", "expected a number or \"inf\"");
      cfg.ap = kInfinity;
    } else {
      cfg.ap = read_number(*it, "ap");
    }
  }
  if (auto it = j.find("mc"); it != j.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "unlimited") {
        throw ConfigError("mc", "expected an integer or \"unlimited\"");
      }
      cfg.mc.reset();
    } else {
      cfg.mc = read_count(*it, "mc");
    }
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) throw ConfigError(item.key(), "unknown field");
  }
}

}  // namespace

void to_json(nlohmann::json& j, const PruneConfig& cfg) {
  j = nlohmann::json::object();
  j["rp"] = cfg.rp;
  if (cfg.ap == kInfinity) {
    j["ap"] = "inf";
  } else {
    j["ap"] = cfg.ap;
  }
  j["rpl"] = cfg.rpl;
  if (cfg.mc) {
    j["mc"] = *cfg.mc;
  } else {
    j["mc"] = "unlimited";
  }
}

void from_json(const nlohmann::json& j, PruneConfig& cfg) {
  reject_unknown(j, {"rp", "ap", "rpl", "mc"});
  cfg = PruneConfig{};
  read_prune_fields(j, cfg);
}

void to_json(nlohmann::json& j, const DecodeConfig& cfg) {
  to_json(j, cfg.prune);
  if (cfg.beam_size) {
    j["beam_size"] = *cfg.beam_size;
  } else {
    j["beam_size"] = "unbounded";
  }
  j["max_len_factor"] = cfg.max_len_factor;
  j["max_len_offset"] = cfg.max_len_offset;
  j["normalize_by_length"] = cfg.normalize_by_length;
  j["unbounded_cap"] = cfg.unbounded_cap;
}

void from_json(const nlohmann::json& j, DecodeConfig& cfg) {
  reject_unknown(j, {"rp", "ap", "rpl", "mc", "beam_size", "max_len_factor", "max_len_offset",
                     "normalize_by_length", "unbounded_cap"});
  cfg = DecodeConfig{};
  read_prune_fields(j, cfg.prune);
  if (auto it = j.find("beam_size"); it != j.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "unbounded") {
        throw ConfigError("beam_size", "expected an integer or \"unbounded\"");
      }
      cfg.beam_size.reset();
    } else {
      cfg.beam_size = read_count(*it, "beam_size");
    }
  }
  if (auto it = j.find("max_len_factor"); it != j.end()) {
    cfg.max_len_factor = read_number(*it, "max_len_factor");
  }
  if (auto it = j.find("max_len_offset"); it != j.end()) {
    if (!it->is_number_integer()) throw ConfigError("max_len_offset", "expected an integer");
    cfg.max_len_offset = it->get<std::int64_t>();
  }
  if (auto it = j.find("normalize_by_length"); it != j.end()) {
    if (!it->is_boolean()) throw ConfigError("normalize_by_length", "expected a boolean");
    cfg.normalize_by_length = it->get<bool>();
  }
  if (auto it = j.find("unbounded_cap"); it != j.end()) {
    cfg.unbounded_cap = read_count(*it, "unbounded_cap");
  }
}

}  // namespace beamprune
