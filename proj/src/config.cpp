#include "avae/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace avae {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(key + ": expected a number, got '" + s + "'");
}

std::uint64_t to_uint(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    if (!s.empty() && s[0] != '-') {
      const unsigned long long v = std::stoull(s, &used);
      if (used == s.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw UsageError(key + ": expected a non-negative integer, got '" + s + "'");
}

bool to_bool(const std::string& key, const std::string& s) {
  const std::string l = boost::to_lower_copy(s);
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  throw UsageError(key + ": expected true or false, got '" + s + "'");
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define AVAE_DOUBLE(k, member)                                                   \
  Field{k, [](const RunConfig& c) { return fmt(c.member); },                     \
        [](RunConfig& c, const std::string& v) { c.member = to_double(k, v); }}
#define AVAE_UINT(k, member)                                                     \
  Field{k, [](const RunConfig& c) { return std::to_string(c.member); },          \
        [](RunConfig& c, const std::string& v) { c.member = to_uint(k, v); }}
#define AVAE_BOOL(k, member)                                                     \
  Field{k, [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }, \
        [](RunConfig& c, const std::string& v) { c.member = to_bool(k, v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      AVAE_UINT("model.image_size", train.image_size),
      AVAE_UINT("model.channels", train.channels),
      AVAE_UINT("model.latent_dim", train.latent_dim),
      Field{"model.widths",
            [](const RunConfig& c) {
              const auto& w = c.train.widths;
              return std::to_string(w[0]) + "," + std::to_string(w[1]) + "," + std::to_string(w[2]);
            },
            [](RunConfig& c, const std::string& v) {
              std::vector<std::string> parts;
              boost::split(parts, v, boost::is_any_of(","));
              if (parts.size() != 3) throw UsageError("model.widths: expected three comma-separated widths");
              for (std::size_t i = 0; i < 3; ++i) {
                c.train.widths[i] = to_uint("model.widths", boost::trim_copy(parts[i]));
              }
            }},
      AVAE_DOUBLE("loss.alpha", train.alpha),
      AVAE_DOUBLE("loss.beta", train.beta),
      AVAE_DOUBLE("loss.gamma", train.gamma),
      Field{"loss.fake_energy",
            [](const RunConfig& c) {
              return std::string(c.train.fake_energy == FakeEnergy::SelfReconstruction ? "self" : "real");
            },
            [](RunConfig& c, const std::string& v) {
              if (v == "self") c.train.fake_energy = FakeEnergy::SelfReconstruction;
              else if (v == "real") c.train.fake_energy = FakeEnergy::AgainstReal;
              else throw UsageError("loss.fake_energy: expected 'self' or 'real', got '" + v + "'");
            }},
      AVAE_DOUBLE("controller.eta", train.eta),
      AVAE_DOUBLE("controller.lambda1", train.lambda1),
      AVAE_DOUBLE("controller.lambda2", train.lambda2),
      AVAE_DOUBLE("controller.lambda3", train.lambda3),
      AVAE_BOOL("controller.literal_error_sign", train.literal_error_sign),
      AVAE_BOOL("controller.adaptive_eta", train.adaptive_eta),
      AVAE_DOUBLE("optim.lr", train.lr),
      AVAE_DOUBLE("optim.beta1", train.adam_beta1),
      AVAE_DOUBLE("optim.beta2", train.adam_beta2),
      AVAE_DOUBLE("optim.eps", train.adam_eps),
      AVAE_UINT("train.batch", train.batch),
      AVAE_UINT("train.iterations", train.iterations),
      AVAE_UINT("train.seed", train.seed),
      AVAE_UINT("train.checkpoint_interval", train.checkpoint_interval),
      AVAE_UINT("train.metrics_interval", train.metrics_interval),
      Field{"data.path", [](const RunConfig& c) { return c.data; },
            [](RunConfig& c, const std::string& v) { c.data = v; }},
      AVAE_DOUBLE("data.held_out", held_out),
  };
  return table;
}

#undef AVAE_DOUBLE
#undef AVAE_UINT
#undef AVAE_BOOL

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(cfg, boost::trim_copy(value));
      return;
    }
  }
  throw UsageError("unknown config key '" + key + "'");
}

void apply_assignment(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("expected section.key=value, got '" + assignment + "'");
  apply_setting(cfg, boost::trim_copy(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw UsageError("config: key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      apply_setting(cfg, section + "." + key, value.get_value<std::string>());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    apply_config_text(cfg, ss.str());
  } catch (const UsageError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

std::string format_config(const RunConfig& cfg) {
  std::string out, section;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string s = f.key.substr(0, dot);
    if (s != section) {
      if (!out.empty()) out += "\n";
      out += "[" + s + "]\n";
      section = s;
    }
    out += f.key.substr(dot + 1) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  apply_config_text(cfg, text);
  return cfg;
}

}  // namespace avae
