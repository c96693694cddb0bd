/*
 * Copyright 2026 The gairlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "gair/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <type_traits>

#include "gair/errors.hpp"

namespace gair {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

class Section {
 public:
  Section(std::string name, std::size_t line) : name_(std::move(name)), line_(line) {}

  const std::string& name() const { return name_; }
  std::size_t line() const { return line_; }

  void add(std::string key, std::string value, std::size_t line) {
    for (const auto& e : entries_) {
      if (e.key == key) throw ParseError("duplicate key '" + key + "' in [" + name_ + "]", line);
    }
    entries_.push_back({std::move(key), std::move(value), line, false});
  }

  Entry* take(std::string_view key) {
    for (auto& e : entries_) {
      if (e.key == key) {
        e.used = true;
        return &e;
      }
    }
    return nullptr;
  }

  Entry& require(std::string_view key) {
    Entry* e = take(key);
    if (e == nullptr) {
      throw ParseError("missing required key '" + std::string(key) + "' in [" + name_ + "]", line_);
    }
    return *e;
  }

  void reject_unused() const {
    for (const auto& e : entries_) {
      if (!e.used) throw ParseError("unknown key '" + e.key + "' in [" + name_ + "]", e.line);
    }
  }

 private:
  std::string name_;
  std::size_t line_;
  std::vector<Entry> entries_;
};

double to_double(const Entry& e) {
  double v = 0.0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("'" + e.key + "' expects a number, got '" + e.value + "'", e.line);
  return v;
}

template <class Int>
Int to_integer(const Entry& e) {
  Int v = 0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("'" + e.key + "' expects an integer, got '" + e.value + "'", e.line);
  }
  return v;
}

bool to_bool(const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ParseError("'" + e.key + "' expects true or false, got '" + e.value + "'", e.line);
}

template <class Enum>
Enum to_enum(const Entry& e, std::type_identity_t<std::initializer_list<std::pair<std::string_view, Enum>>> options) {
  for (const auto& [name, value] : options) {
    if (e.value == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : options) {
    if (!allowed.empty()) allowed += ", ";
    allowed += name;
  }
  throw ParseError("bad value '" + e.value + "' for '" + e.key + "'; allowed values: " + allowed, e.line);
}

std::pair<double, double> to_pair(const Entry& e) {
  const auto parts = split(e.value, ',');
  if (parts.size() != 2) throw ParseError("'" + e.key + "' expects two comma-separated numbers", e.line);
  Entry a{e.key, parts[0], e.line};
  Entry b{e.key, parts[1], e.line};
  return {to_double(a), to_double(b)};
}

// "epoch:value, epoch:value"
std::vector<std::pair<int, std::string>> to_schedule(const Entry& e) {
  std::vector<std::pair<int, std::string>> out;
  if (trim(e.value).empty()) return out;
  for (const auto& item : split(e.value, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw ParseError("'" + e.key + "' expects epoch:value pairs", e.line);
    Entry epoch{e.key, parts[0], e.line};
    out.emplace_back(to_integer<int>(epoch), parts[1]);
  }
  return out;
}

std::string_view random_start_name(RandomStart r) {
  switch (r) {
    case RandomStart::Uniform: return "uniform";
    case RandomStart::Gaussian: return "gaussian";
    case RandomStart::None: break;
  }
  return "none";
}

void validate_layer_token(const std::string& token, std::size_t line) {
  const auto parts = split(token, ':');
  auto positive = [&](const std::string& s) {
    Entry e{"layers", s, line};
    if (to_integer<std::size_t>(e) == 0) throw ParseError("layer extents must be positive", line);
  };
  if (parts[0] == "relu" && parts.size() == 1) return;
  if (parts[0] == "dense" && parts.size() == 2) return positive(parts[1]);
  if (parts[0] == "conv" && parts.size() == 3) {
    positive(parts[1]);
    positive(parts[2]);
    return;
  }
  throw ParseError("bad layer '" + token + "'; expected dense:<out>, relu or conv:<channels>:<kernel>", line);
}

// Attack keys shared by [attack] and [eval.*]; clamp "auto" resolves against the dataset.
AttackConfig read_attack(Section& s, AttackConfig base, bool boxed_dataset, bool allow_tau) {
  if (auto* e = s.take("epsilon")) base.epsilon = to_double(*e);
  if (auto* e = s.take("alpha")) base.alpha = to_double(*e);
  if (auto* e = s.take("steps")) base.steps = to_integer<int>(*e);
  if (allow_tau) {
    if (auto* e = s.take("tau")) base.tau = to_integer<int>(*e);
  }
  if (auto* e = s.take("restarts")) base.restarts = to_integer<int>(*e);
  if (auto* e = s.take("random_start")) base.random_start = to_enum<RandomStart>(
      *e, {{"none", RandomStart::None}, {"uniform", RandomStart::Uniform}, {"gaussian", RandomStart::Gaussian}});
  if (auto* e = s.take("xi")) base.xi = to_double(*e);
  std::string clamp = "auto";
  std::size_t clamp_line = s.line();
  if (auto* e = s.take("clamp")) {
    clamp = e->value;
    clamp_line = e->line;
  }
  if (clamp == "on") {
    base.clamp_box = Box{};
  } else if (clamp == "off") {
    base.clamp_box.reset();
  } else if (clamp == "auto") {
    base.clamp_box = boxed_dataset ? std::optional<Box>(Box{}) : std::nullopt;
  } else {
    throw ParseError("bad value '" + clamp + "' for 'clamp'; allowed values: auto, on, off", clamp_line);
  }
  try {
    base.validate();
  } catch (const ConfigError& err) {
    throw ParseError(std::string("[") + s.name() + "] " + err.what(), s.line());
  }
  return base;
}

void write_attack(std::ostringstream& out, const AttackConfig& a, bool with_tau) {
  out << "epsilon = " << fmt_double(a.epsilon) << "\n";
  out << "alpha = " << fmt_double(a.alpha) << "\n";
  out << "steps = " << a.steps << "\n";
  if (with_tau) out << "tau = " << a.tau << "\n";
  out << "restarts = " << a.restarts << "\n";
  out << "random_start = " << random_start_name(a.random_start) << "\n";
  out << "xi = " << fmt_double(a.xi) << "\n";
  out << "clamp = " << (a.clamp_box ? "on" : "off") << "\n";
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  std::vector<Section> sections;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = raw.find('#');
    std::string_view line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("malformed section header", line_no);
      std::string name(trim(line.substr(1, line.size() - 2)));
      static const std::vector<std::string> known = {"run",    "dataset", "model",    "trainer",
                                                      "attack", "scheme",  "optimizer"};
      const bool is_eval = name.rfind("eval.", 0) == 0 && name.size() > 5;
      if (!is_eval && std::find(known.begin(), known.end(), name) == known.end()) {
        throw ParseError("unknown section [" + name + "]", line_no);
      }
      for (const auto& s : sections) {
        if (s.name() == name) throw ParseError("duplicate section [" + name + "]", line_no);
      }
      sections.emplace_back(std::move(name), line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    if (sections.empty()) throw ParseError("key outside of any section", line_no);
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError("empty key", line_no);
    sections.back().add(std::move(key), std::string(trim(line.substr(eq + 1))), line_no);
  }

  auto find = [&](std::string_view name) -> Section* {
    for (auto& s : sections) {
      if (s.name() == name) return &s;
    }
    return nullptr;
  };
  auto need = [&](std::string_view name) -> Section& {
    Section* s = find(name);
    if (s == nullptr) throw ParseError("missing required section [" + std::string(name) + "]", 0);
    return *s;
  };

  ExperimentConfig cfg;

  Section& run = need("run");
  cfg.seed = to_integer<std::uint64_t>(run.require("seed"));
  if (auto* e = run.take("output")) cfg.output_dir = e->value;
  if (auto* e = run.take("eval_every")) {
    cfg.eval_every = to_integer<int>(*e);
    if (cfg.eval_every < 1) throw ParseError("eval_every must be at least 1", e->line);
  }
  if (auto* e = run.take("flatness")) {
    cfg.flatness = to_enum<FlatnessMode>(*e, {{"friendly", FlatnessMode::Friendly},
                                {"most_adversarial", FlatnessMode::MostAdversarial}});
  }
  if (auto* e = run.take("record_wall_time")) cfg.record_wall_time = to_bool(*e);
  run.reject_unused();

  Section& ds = need("dataset");
  auto& d = cfg.dataset;
  d.kind = to_enum<DatasetKind>(ds.require("kind"),
                   {{"blobs", DatasetKind::Blobs}, {"circles", DatasetKind::Circles}, {"idx", DatasetKind::Idx}});
  if (auto* e = ds.take("n_per_class")) d.n_per_class = to_integer<std::size_t>(*e);
  if (auto* e = ds.take("test_n_per_class")) d.test_n_per_class = to_integer<std::size_t>(*e);
  if (auto* e = ds.take("mean0")) {
    auto [x, y] = to_pair(*e);
    d.means[0] = {x, y};
  }
  if (auto* e = ds.take("mean1")) {
    auto [x, y] = to_pair(*e);
    d.means[1] = {x, y};
  }
  if (auto* e = ds.take("sigma")) d.sigma = to_double(*e);
  if (auto* e = ds.take("radius0")) d.radii[0] = to_double(*e);
  if (auto* e = ds.take("radius1")) d.radii[1] = to_double(*e);
  if (auto* e = ds.take("noise")) d.noise = to_double(*e);
  if (auto* e = ds.take("train_images")) d.train_images = e->value;
  if (auto* e = ds.take("train_labels")) d.train_labels = e->value;
  if (auto* e = ds.take("test_images")) d.test_images = e->value;
  if (auto* e = ds.take("test_labels")) d.test_labels = e->value;
  if (auto* e = ds.take("classes")) d.classes = to_integer<std::size_t>(*e);
  if (d.kind == DatasetKind::Idx && (d.train_images.empty() || d.train_labels.empty() || d.test_images.empty() ||
                                     d.test_labels.empty())) {
    throw ParseError("idx datasets need train_images, train_labels, test_images and test_labels", ds.line());
  }
  ds.reject_unused();
  const bool boxed = d.kind == DatasetKind::Idx;

  Section& md = need("model");
  {
    Entry& e = md.require("layers");
    for (auto& token : split(e.value, ',')) {
      validate_layer_token(token, e.line);
      cfg.model.layers.push_back(token);
    }
    if (auto* img = md.take("image")) {
      const auto parts = split(img->value, ',');
      if (parts.size() != 3) throw ParseError("'image' expects C, H, W", img->line);
      std::array<std::size_t, 3> dims{};
      for (std::size_t i = 0; i < 3; ++i) dims[i] = to_integer<std::size_t>(Entry{"image", parts[i], img->line});
      cfg.model.image = dims;
    }
  }
  md.reject_unused();

  Section& tr = need("trainer");
  auto& t = cfg.trainer;
  t.kind = to_enum<TrainerKind>(tr.require("kind"), {{"gairat", TrainerKind::Gairat},
                                        {"gair_trades", TrainerKind::GairTrades},
                                        {"gair_mart", TrainerKind::GairMart}});
  if (auto* e = tr.take("epochs")) t.epochs = to_integer<int>(*e);
  if (auto* e = tr.take("batch_size")) t.batch_size = to_integer<std::size_t>(*e);
  if (auto* e = tr.take("beta")) t.beta = to_double(*e);
  if (auto* e = tr.take("mart_variant")) {
    t.mart_variant = to_enum<MartVariant>(*e, {{"mart", MartVariant::Mart},
                                  {"gair_margin", MartVariant::GairMargin},
                                  {"gair_kl", MartVariant::GairKl}});
  }
  if (auto* e = tr.take("attack_mode")) {
    t.attack_mode = to_enum<AttackMode>(*e, {{"most_adversarial", AttackMode::MostAdversarial},
                                 {"friendly", AttackMode::Friendly}});
  }
  if (auto* e = tr.take("tau_schedule")) {
    for (const auto& [epoch, value] : to_schedule(*e)) {
      t.tau_schedule.push_back({epoch, to_integer<int>(Entry{"tau_schedule", value, e->line})});
    }
  }
  tr.reject_unused();
  t.seed = cfg.seed;

  if (Section* at = find("attack")) {
    t.attack = read_attack(*at, AttackConfig{}, boxed, true);
    at->reject_unused();
  } else {
    t.attack.clamp_box = boxed ? std::optional<Box>(Box{}) : std::nullopt;
  }

  t.scheme = WeightScheme{WeightFamily::Tanh, 0.0, t.epochs / 2};
  if (Section* sc = find("scheme")) {
    if (auto* e = sc->take("family")) {
      t.scheme.family = to_enum<WeightFamily>(*e, {{"constant", WeightFamily::Constant},
                                     {"tanh", WeightFamily::Tanh},
                                     {"linear", WeightFamily::Linear},
                                     {"sigmoid", WeightFamily::Sigmoid}});
    }
    if (auto* e = sc->take("lambda")) t.scheme.lambda = to_double(*e);
    if (auto* e = sc->take("burn_in")) t.scheme.burn_in_epochs = to_integer<int>(*e);
    sc->reject_unused();
  }

  double lr = 0.1;
  std::vector<LrSchedule::Milestone> milestones;
  if (Section* op = find("optimizer")) {
    if (auto* e = op->take("lr")) lr = to_double(*e);
    if (auto* e = op->take("momentum")) t.sgd.momentum = to_double(*e);
    if (auto* e = op->take("weight_decay")) t.sgd.weight_decay = to_double(*e);
    if (auto* e = op->take("milestones")) {
      for (const auto& [epoch, value] : to_schedule(*e)) {
        milestones.push_back({epoch, to_double(Entry{"milestones", value, e->line})});
      }
    }
    op->reject_unused();
  }
  try {
    t.schedule = LrSchedule(lr, std::move(milestones));
    t.validate();
  } catch (const ConfigError& err) {
    throw ParseError(err.what(), 0);
  }

  for (auto& s : sections) {
    if (s.name().rfind("eval.", 0) != 0) continue;
    AttackConfig base = t.attack;
    base.tau = 0;
    base.restarts = 1;
    NamedAttack named{s.name().substr(5), read_attack(s, base, boxed, false)};
    s.reject_unused();
    cfg.eval_attacks.push_back(std::move(named));
  }
  if (cfg.eval_attacks.empty()) {
    AttackConfig pgd20 = t.attack;
    pgd20.tau = 0;
    pgd20.restarts = 1;
    pgd20.steps = 20;
    pgd20.alpha = t.attack.epsilon > 0.0 ? t.attack.epsilon / 4.0 : t.attack.alpha;
    pgd20.random_start = RandomStart::Uniform;
    cfg.eval_attacks.push_back({"pgd20", pgd20});
  }
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[run]\n";
  out << "seed = " << cfg.seed << "\n";
  out << "output = " << cfg.output_dir << "\n";
  out << "eval_every = " << cfg.eval_every << "\n";
  out << "flatness = " << (cfg.flatness == FlatnessMode::Friendly ? "friendly" : "most_adversarial") << "\n";
  out << "record_wall_time = " << (cfg.record_wall_time ? "true" : "false") << "\n\n";

  const auto& d = cfg.dataset;
  out << "[dataset]\n";
  out << "kind = " << (d.kind == DatasetKind::Blobs ? "blobs" : d.kind == DatasetKind::Circles ? "circles" : "idx")
      << "\n";
  out << "n_per_class = " << d.n_per_class << "\n";
  out << "test_n_per_class = " << d.test_n_per_class << "\n";
  out << "mean0 = " << fmt_double(d.means[0].x) << ", " << fmt_double(d.means[0].y) << "\n";
  out << "mean1 = " << fmt_double(d.means[1].x) << ", " << fmt_double(d.means[1].y) << "\n";
  out << "sigma = " << fmt_double(d.sigma) << "\n";
  out << "radius0 = " << fmt_double(d.radii[0]) << "\n";
  out << "radius1 = " << fmt_double(d.radii[1]) << "\n";
  out << "noise = " << fmt_double(d.noise) << "\n";
  if (!d.train_images.empty()) out << "train_images = " << d.train_images << "\n";
  if (!d.train_labels.empty()) out << "train_labels = " << d.train_labels << "\n";
  if (!d.test_images.empty()) out << "test_images = " << d.test_images << "\n";
  if (!d.test_labels.empty()) out << "test_labels = " << d.test_labels << "\n";
  out << "classes = " << d.classes << "\n\n";

  out << "[model]\n";
  out << "layers = ";
  for (std::size_t i = 0; i < cfg.model.layers.size(); ++i) out << (i ? ", " : "") << cfg.model.layers[i];
  out << "\n";
  if (cfg.model.image) {
    out << "image = " << (*cfg.model.image)[0] << ", " << (*cfg.model.image)[1] << ", " << (*cfg.model.image)[2]
        << "\n";
  }
  out << "\n";

  const auto& t = cfg.trainer;
  out << "[trainer]\n";
  out << "kind = " << to_string(t.kind) << "\n";
  out << "epochs = " << t.epochs << "\n";
  out << "batch_size = " << t.batch_size << "\n";
  out << "beta = " << fmt_double(t.beta) << "\n";
  out << "mart_variant = " << to_string(t.mart_variant) << "\n";
  out << "attack_mode = " << to_string(t.attack_mode) << "\n";
  out << "tau_schedule = ";
  for (std::size_t i = 0; i < t.tau_schedule.size(); ++i) {
    out << (i ? ", " : "") << t.tau_schedule[i].epoch << ":" << t.tau_schedule[i].tau;
  }
  out << "\n\n";

  out << "[attack]\n";
  write_attack(out, t.attack, true);
  out << "\n";

  out << "[scheme]\n";
  out << "family = " << to_string(t.scheme.family) << "\n";
  out << "lambda = " << fmt_double(t.scheme.lambda) << "\n";
  out << "burn_in = " << t.scheme.burn_in_epochs << "\n\n";

  out << "[optimizer]\n";
  out << "lr = " << fmt_double(t.schedule.initial()) << "\n";
  out << "momentum = " << fmt_double(t.sgd.momentum) << "\n";
  out << "weight_decay = " << fmt_double(t.sgd.weight_decay) << "\n";
  out << "milestones = ";
  const auto& ms = t.schedule.milestones();
  for (std::size_t i = 0; i < ms.size(); ++i) out << (i ? ", " : "") << ms[i].epoch << ":" << fmt_double(ms[i].divisor);
  out << "\n";

  for (const auto& a : cfg.eval_attacks) {
    out << "\n[eval." << a.name << "]\n";
    write_attack(out, a.config, false);
  }
  return out.str();
}

std::vector<LayerSpec> build_layers(const ModelSpec& spec, std::size_t features) {
  std::vector<LayerSpec> layers;
  std::size_t width = features;
  bool has_image = spec.image.has_value();
  std::array<std::size_t, 3> image = spec.image.value_or(std::array<std::size_t, 3>{});
  for (const auto& token : spec.layers) {
    const auto parts = split(token, ':');
    if (parts[0] == "relu") {
      layers.emplace_back(Relu{});
    } else if (parts[0] == "dense") {
      const std::size_t out = std::stoul(parts[1]);
      layers.emplace_back(Dense{width, out});
      width = out;
      has_image = false;
    } else if (parts[0] == "conv") {
      if (!has_image) throw ConfigError("conv layers need [model] image = C, H, W (and must precede dense layers)");
      auto [c, h, w] = image;
      if (c * h * w != width) throw ConfigError("image shape does not match the feature count");
      const std::size_t channels = std::stoul(parts[1]);
      layers.emplace_back(Conv2D{c, channels, h, w, std::stoul(parts[2])});
      image = std::array<std::size_t, 3>{channels, h, w};
      width = channels * h * w;
    } else {
      throw ConfigError("unknown layer token " + token);
    }
  }
  return layers;
}

}  // namespace gair
