// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace panfuse {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out)) throw ConfigError(key, "expected a real number, got '" + value + "'");
  return out;
}

double parse_non_negative(const std::string& key, const std::string& value) {
  const double v = parse_real(key, value);
  if (v < 0.0) throw ConfigError(key, "must be non-negative");
  return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError(key, "expected a non-negative integer, got '" + value + "'");
  return out;
}

std::set<std::int32_t> parse_class_set(const std::string& key, const std::string& value) {
  std::set<std::int32_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string token(trim(item));
    if (token.empty()) continue;
    const auto id = parse_count(key, token);
    if (id > 0xFFFF) throw ConfigError(key, "class id " + token + " exceeds 65535");
    out.insert(static_cast<std::int32_t>(id));
  }
  return out;
}

std::string class_set_text(const std::set<std::int32_t>& s) {
  std::string out;
  for (std::int32_t c : s) {
    if (!out.empty()) out += ",";
    out += std::to_string(c);
  }
  return out;
}

std::string real_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

void apply_settings(const std::map<std::string, std::string>& entries, const std::map<std::string, Setter>& setters) {
  for (const auto& [key, value] : entries) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key");
    it->second(key, value);
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), "line " + std::to_string(line_no) + " is not of the form key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(line_no) + " has an empty key");
    if (!out.emplace(key, value).second) throw ConfigError(key, "duplicate key");
  }
  return out;
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  PipelineConfig c;
  auto real = [](double& field) {
    return Setter([&field](const std::string& k, const std::string& v) { field = parse_non_negative(k, v); });
  };
  const std::map<std::string, Setter> setters{
      {"delta_cen", real(c.postprocess.delta_cen)},
      {"delta_emb", real(c.postprocess.delta_emb)},
      {"theta", real(c.postprocess.theta)},
      {"stuff_classes",
       [&c](const std::string& k, const std::string& v) { c.postprocess.stuff_classes = parse_class_set(k, v); }},
      {"delta_a", real(c.embedding.delta_a)},
      {"delta_r", real(c.embedding.delta_r)},
      {"beta1", real(c.embedding.beta1)},
      {"beta2", real(c.embedding.beta2)},
      {"beta3", real(c.embedding.beta3)},
      {"alpha", real(c.focal.alpha)},
      {"tau", real(c.focal.tau)},
      {"w1", real(c.weights.w1)},
      {"w2", real(c.weights.w2)},
      {"w3", real(c.weights.w3)},
      {"lambda", real(c.lambda)},
      {"d_emb", [&c](const std::string& k, const std::string& v) { c.embedding_dim = parse_count(k, v); }},
      {"p_drop", real(c.p_drop)},
  };
  apply_settings(parse_key_values(text), setters);

  if (!(c.postprocess.delta_cen > 0.0 && c.postprocess.delta_cen < 1.0)) throw ConfigError("delta_cen", "must lie in (0,1)");
  if (!(c.postprocess.delta_emb > 0.0)) throw ConfigError("delta_emb", "must be positive");
  if (!(c.postprocess.theta > 0.0)) throw ConfigError("theta", "must be positive");
  if (!(c.focal.alpha > 0.0 && c.focal.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0,1)");
  if (!(c.embedding.delta_r > c.embedding.delta_a)) throw ConfigError("delta_r", "must exceed delta_a");
  if (c.p_drop > 1.0) throw ConfigError("p_drop", "must lie in [0,1]");
  if (c.embedding_dim == 0) throw ConfigError("d_emb", "must be positive");
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) { return parse_pipeline_config(slurp(path)); }

std::string PipelineConfig::to_text() const {
  std::string out;
  auto line = [&out](const char* key, const std::string& value) { out += std::string(key) + " = " + value + "\n"; };
  line("delta_cen", real_text(postprocess.delta_cen));
  line("delta_emb", real_text(postprocess.delta_emb));
  line("theta", real_text(postprocess.theta));
  line("stuff_classes", class_set_text(postprocess.stuff_classes));
  line("delta_a", real_text(embedding.delta_a));
  line("delta_r", real_text(embedding.delta_r));
  line("beta1", real_text(embedding.beta1));
  line("beta2", real_text(embedding.beta2));
  line("beta3", real_text(embedding.beta3));
  line("alpha", real_text(focal.alpha));
  line("tau", real_text(focal.tau));
  line("w1", real_text(weights.w1));
  line("w2", real_text(weights.w2));
  line("w3", real_text(weights.w3));
  line("lambda", real_text(lambda));
  line("d_emb", std::to_string(embedding_dim));
  line("p_drop", real_text(p_drop));
  return out;
}

SceneSpec parse_scene_spec(std::string_view text) {
  SceneSpec s;
  auto count = [](std::size_t& field) {
    return Setter([&field](const std::string& k, const std::string& v) { field = parse_count(k, v); });
  };
  auto real = [](double& field) {
    return Setter([&field](const std::string& k, const std::string& v) { field = parse_non_negative(k, v); });
  };
  const std::map<std::string, Setter> setters{
      {"height", count(s.height)},
      {"width", count(s.width)},
      {"num_classes", count(s.num_classes)},
      {"stuff_classes", [&s](const std::string& k, const std::string& v) { s.stuff_classes = parse_class_set(k, v); }},
      {"num_instances", count(s.num_instances)},
      {"embedding_dim", count(s.embedding_dim)},
      {"delta_r", real(s.delta_r)},
      {"sem_flip_rate", real(s.noise.sem_flip_rate)},
      {"center_sigma", real(s.noise.center_sigma)},
      {"emb_noise_sigma", real(s.noise.emb_noise_sigma)},
      {"seed", [&s](const std::string& k, const std::string& v) { s.seed = parse_count(k, v); }},
  };
  apply_settings(parse_key_values(text), setters);
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ConfigError("", e.what());
  }
  return s;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) { return parse_scene_spec(slurp(path)); }

std::string to_text(const SceneSpec& s) {
  std::string out;
  auto line = [&out](const char* key, const std::string& value) { out += std::string(key) + " = " + value + "\n"; };
  line("height", std::to_string(s.height));
  line("width", std::to_string(s.width));
  line("num_classes", std::to_string(s.num_classes));
  line("stuff_classes", class_set_text(s.stuff_classes));
  line("num_instances", std::to_string(s.num_instances));
  line("embedding_dim", std::to_string(s.embedding_dim));
  line("delta_r", real_text(s.delta_r));
  line("sem_flip_rate", real_text(s.noise.sem_flip_rate));
  line("center_sigma", real_text(s.noise.center_sigma));
  line("emb_noise_sigma", real_text(s.noise.emb_noise_sigma));
  line("seed", std::to_string(s.seed));
  return out;
}

}  // namespace panfuse
