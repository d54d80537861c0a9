#include "ringgnn/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <system_error>

namespace ringgnn {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& key, int line, const std::string& what) {
  throw ConfigError("config:" + std::to_string(line) + ": " + key + ": " + what);
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const Entry& at(const std::string& key) const { return entries_.at(key); }

  // Marks a key as consumed and returns its value.
  std::optional<Entry> take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }

  void require_all_used(const std::string& context) const {
    for (const auto& [key, e] : entries_) {
      if (!used_.count(key)) fail(key, e.line, "unknown key" + context);
    }
  }

  template <typename F>
  void with(const std::string& key, F apply) {
    if (auto e = take(key)) apply(*e);
  }

 private:
  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
};

long long to_int(const std::string& key, const Entry& e) {
  long long v = 0;
  const char* end = e.value.data() + e.value.size();
  auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(key, e.line, "expected an integer, got '" + e.value + "'");
  return v;
}

double to_double(const std::string& key, const Entry& e) {
  double v = 0.0;
  const char* end = e.value.data() + e.value.size();
  auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(key, e.line, "expected a number, got '" + e.value + "'");
  return v;
}

bool to_bool(const std::string& key, const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  fail(key, e.line, "expected true or false, got '" + e.value + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

std::vector<int> to_int_list(const std::string& key, const Entry& e) {
  std::vector<int> out;
  for (const auto& item : split_list(e.value)) out.push_back(static_cast<int>(to_int(key, {item, e.line})));
  return out;
}

std::vector<std::uint64_t> to_seed_list(const std::string& key, const Entry& e) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(e.value)) {
    const long long v = to_int(key, {item, e.line});
    if (v < 0) fail(key, e.line, "seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

SgnnOperator to_operator(const std::string& key, const Entry& e, const std::string& item) {
  if (item == "I") return {SgnnOperatorKind::kIdentity, 0};
  if (item == "D") return {SgnnOperatorKind::kDegree, 0};
  if (item.size() > 1 && item[0] == 'P') {
    const long long t = to_int(key, {item.substr(1), e.line});
    if (t < 0 || t > 62) fail(key, e.line, "power exponent out of range in '" + item + "'");
    return {SgnnOperatorKind::kPower, static_cast<int>(t)};
  }
  fail(key, e.line, "unknown operator '" + item + "' (expected I, D or P<t>)");
}

std::map<std::string, Entry> tokenize(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(s, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "dataset" && section != "model" && section != "optimizer" && section != "training") {
        fail("[" + section + "]", line, "unknown section");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(s, line, "expected key = value");
    const std::string key = (section.empty() ? "" : section + ".") + trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (trim(s.substr(0, eq)).empty()) fail(s, line, "missing key");
    if (value.empty()) fail(key, line, "missing value");
    if (entries.count(key)) fail(key, line, "duplicate key (first set on line " + std::to_string(entries[key].line) + ")");
    entries[key] = {value, line};
  }
  return entries;
}

void apply_model(Reader& r, ModelSpec& m) {
  auto widths = [&](std::vector<int>& w) {
    r.with("model.widths", [&](const Entry& e) { w = to_int_list("model.widths", e); });
  };
  auto mlp = [&](std::vector<int>& h) {
    r.with("model.mlp_hidden", [&](const Entry& e) { h = to_int_list("model.mlp_hidden", e); });
  };
  auto flag = [&](const std::string& key, bool& b) { r.with(key, [&](const Entry& e) { b = to_bool(key, e); }); };
  auto number = [&](const std::string& key, double& d) { r.with(key, [&](const Entry& e) { d = to_double(key, e); }); };
  auto integer = [&](const std::string& key, int& i) {
    r.with(key, [&](const Entry& e) { i = static_cast<int>(to_int(key, e)); });
  };

  switch (m.family) {
    case ModelFamily::kOrder2:
      widths(m.order2.widths);
      mlp(m.order2.mlp_hidden);
      flag("model.normalize", m.order2.normalize);
      break;
    case ModelFamily::kRingGnn: {
      widths(m.ring.widths);
      mlp(m.ring.mlp_hidden);
      flag("model.normalize", m.ring.normalize);
      number("model.k1_mean", m.ring.k1.mean);
      number("model.k1_std", m.ring.k1.std);
      number("model.k2_mean", m.ring.k2.mean);
      number("model.k2_std", m.ring.k2.std);
      r.with("model.eigenvalues", [&](const Entry& e) {
        const long long k = to_int("model.eigenvalues", e);
        if (k < 0) fail("model.eigenvalues", e.line, "must be non-negative");
        m.ring.use_eigenvalues = k > 0;
        if (k > 0) m.ring.num_eigenvalues = static_cast<int>(k);
      });
      r.with("model.eigen_method", [&](const Entry& e) {
        if (e.value == "jacobi") {
          m.ring.eigen_method = EighMethod::kJacobi;
        } else if (e.value == "tridiagonal") {
          m.ring.eigen_method = EighMethod::kTridiagonal;
        } else {
          fail("model.eigen_method", e.line, "expected jacobi or tridiagonal");
        }
      });
      if (m.ring.k1.std < 0 || m.ring.k2.std < 0) throw ConfigError("model.k1_std/k2_std: must be non-negative");
      break;
    }
    case ModelFamily::kSgnn:
      r.with("model.operators", [&](const Entry& e) {
        m.sgnn.operators.clear();
        for (const auto& item : split_list(e.value)) m.sgnn.operators.push_back(to_operator("model.operators", e, item));
        if (m.sgnn.operators.empty()) fail("model.operators", e.line, "empty operator list");
      });
      integer("model.layers", m.sgnn.layers);
      integer("model.width", m.sgnn.width);
      flag("model.scale_operators", m.sgnn.scale_operators);
      r.with("model.power", [&](const Entry& e) {
        if (e.value == "exact") {
          m.sgnn.power = PowerReading::kExact;
        } else if (e.value == "within") {
          m.sgnn.power = PowerReading::kWithin;
        } else {
          fail("model.power", e.line, "expected exact or within");
        }
      });
      break;
    case ModelFamily::kGin:
      integer("model.layers", m.gin.layers);
      integer("model.width", m.gin.width);
      number("model.epsilon", m.gin.epsilon);
      break;
  }
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + std::to_string(items[i]);
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  auto entries = tokenize(text);
  if (entries.empty()) throw ConfigError("config: empty file (no keys set)");
  Reader r(std::move(entries));

  ExperimentConfig cfg;
  if (auto p = r.take("preset")) {
    try {
      cfg = preset(p->value);
    } catch (const ConfigError&) {
      fail("preset", p->line, "unknown preset '" + p->value + "'");
    }
  } else {
    if (!r.has("model.family")) throw ConfigError("config: model.family: required key is missing");
    if (!r.has("dataset.kind")) throw ConfigError("config: dataset.kind: required key is missing");
  }
  r.with("name", [&](const Entry& e) { cfg.name = e.value; });

  r.with("dataset.kind", [&](const Entry& e) {
    if (e.value == "csl") {
      cfg.dataset.kind = DatasetSpec::Kind::kCsl;
    } else if (e.value == "tu") {
      cfg.dataset.kind = DatasetSpec::Kind::kTu;
    } else {
      fail("dataset.kind", e.line, "expected csl or tu");
    }
  });
  if (cfg.dataset.kind == DatasetSpec::Kind::kCsl) {
    r.with("dataset.n", [&](const Entry& e) { cfg.dataset.csl.n = static_cast<int>(to_int("dataset.n", e)); });
    r.with("dataset.skips", [&](const Entry& e) { cfg.dataset.csl.skips = to_int_list("dataset.skips", e); });
    r.with("dataset.copies", [&](const Entry& e) { cfg.dataset.csl.copies = static_cast<int>(to_int("dataset.copies", e)); });
    r.with("dataset.permute_seed", [&](const Entry& e) {
      const long long v = to_int("dataset.permute_seed", e);
      if (v < 0) fail("dataset.permute_seed", e.line, "must be non-negative");
      cfg.dataset.csl.permute_seed = static_cast<std::uint64_t>(v);
    });
  } else {
    r.with("dataset.path", [&](const Entry& e) { cfg.dataset.tu_path = e.value; });
  }

  r.with("model.family", [&](const Entry& e) {
    try {
      cfg.model.family = family_from_name(e.value);
    } catch (const ConfigError&) {
      fail("model.family", e.line, "expected order2, ring-gnn, sgnn or gin, got '" + e.value + "'");
    }
  });
  apply_model(r, cfg.model);

  r.with("optimizer.kind", [&](const Entry& e) {
    if (e.value == "adam") {
      cfg.optimizer = OptimizerKind::kAdam;
    } else if (e.value == "sgd") {
      cfg.optimizer = OptimizerKind::kSgd;
    } else {
      fail("optimizer.kind", e.line, "expected adam or sgd");
    }
  });
  r.with("optimizer.lr", [&](const Entry& e) { cfg.adam.lr = to_double("optimizer.lr", e); });
  if (cfg.optimizer == OptimizerKind::kAdam) {
    r.with("optimizer.beta1", [&](const Entry& e) { cfg.adam.beta1 = to_double("optimizer.beta1", e); });
    r.with("optimizer.beta2", [&](const Entry& e) { cfg.adam.beta2 = to_double("optimizer.beta2", e); });
    r.with("optimizer.eps", [&](const Entry& e) { cfg.adam.eps = to_double("optimizer.eps", e); });
  }
  r.with("optimizer.clip", [&](const Entry& e) {
    if (e.value == "none") {
      cfg.clip.reset();
    } else {
      cfg.clip = to_double("optimizer.clip", e);
    }
  });

  auto integer = [&](const std::string& key, int& out) {
    r.with(key, [&](const Entry& e) { out = static_cast<int>(to_int(key, e)); });
  };
  integer("training.epochs", cfg.epochs);
  integer("training.batch_size", cfg.batch_size);
  integer("training.folds", cfg.folds);
  integer("training.threads", cfg.threads);
  r.with("training.seeds", [&](const Entry& e) { cfg.seeds = to_seed_list("training.seeds", e); });
  r.with("training.protocol", [&](const Entry& e) {
    if (e.value == "final") {
      cfg.protocol = Protocol::kFinal;
    } else if (e.value == "fold-mean-epoch-max") {
      cfg.protocol = Protocol::kFoldMeanEpochMax;
    } else {
      fail("training.protocol", e.line, "expected final or fold-mean-epoch-max");
    }
  });

  r.require_all_used(" for family " + family_name(cfg.model.family) + " and dataset kind " +
                     (cfg.dataset.kind == DatasetSpec::Kind::kCsl ? "csl" : "tu"));
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& source) {
  std::ifstream in(source);
  if (in) {
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
  }
  for (const auto& name : preset_names()) {
    if (name == source) return preset(name);
  }
  throw ConfigError("config: '" + source + "' is neither a readable file nor a preset name");
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream s;
  s << "name = " << cfg.name << "\n\n[dataset]\n";
  if (cfg.dataset.kind == DatasetSpec::Kind::kCsl) {
    s << "kind = csl\nn = " << cfg.dataset.csl.n << "\nskips = " << join(cfg.dataset.csl.skips)
      << "\ncopies = " << cfg.dataset.csl.copies << "\npermute_seed = " << cfg.dataset.csl.permute_seed << '\n';
  } else {
    s << "kind = tu\npath = " << cfg.dataset.tu_path << '\n';
  }
  const ModelSpec& m = cfg.model;
  s << "\n[model]\nfamily = " << family_name(m.family) << '\n';
  auto b = [](bool v) { return v ? "true" : "false"; };
  switch (m.family) {
    case ModelFamily::kOrder2:
      s << "widths = " << join(m.order2.widths) << "\nmlp_hidden = " << join(m.order2.mlp_hidden)
        << "\nnormalize = " << b(m.order2.normalize) << '\n';
      break;
    case ModelFamily::kRingGnn:
      s << "widths = " << join(m.ring.widths) << "\nmlp_hidden = " << join(m.ring.mlp_hidden)
        << "\nnormalize = " << b(m.ring.normalize) << "\nk1_mean = " << fmt(m.ring.k1.mean)
        << "\nk1_std = " << fmt(m.ring.k1.std) << "\nk2_mean = " << fmt(m.ring.k2.mean)
        << "\nk2_std = " << fmt(m.ring.k2.std) << "\neigenvalues = " << (m.ring.use_eigenvalues ? m.ring.num_eigenvalues : 0)
        << "\neigen_method = " << (m.ring.eigen_method == EighMethod::kJacobi ? "jacobi" : "tridiagonal") << '\n';
      break;
    case ModelFamily::kSgnn: {
      std::string ops;
      for (std::size_t i = 0; i < m.sgnn.operators.size(); ++i) ops += (i ? "," : "") + m.sgnn.operators[i].name();
      s << "operators = " << ops << "\nlayers = " << m.sgnn.layers << "\nwidth = " << m.sgnn.width
        << "\nscale_operators = " << b(m.sgnn.scale_operators)
        << "\npower = " << (m.sgnn.power == PowerReading::kExact ? "exact" : "within") << '\n';
      break;
    }
    case ModelFamily::kGin:
      s << "layers = " << m.gin.layers << "\nwidth = " << m.gin.width << "\nepsilon = " << fmt(m.gin.epsilon) << '\n';
      break;
  }
  s << "\n[optimizer]\nkind = " << (cfg.optimizer == OptimizerKind::kAdam ? "adam" : "sgd") << "\nlr = " << fmt(cfg.adam.lr)
    << '\n';
  if (cfg.optimizer == OptimizerKind::kAdam) {
    s << "beta1 = " << fmt(cfg.adam.beta1) << "\nbeta2 = " << fmt(cfg.adam.beta2) << "\neps = " << fmt(cfg.adam.eps) << '\n';
  }
  s << "clip = " << (cfg.clip ? fmt(*cfg.clip) : std::string("none")) << '\n';
  s << "\n[training]\nepochs = " << cfg.epochs << "\nbatch_size = " << cfg.batch_size << "\nfolds = " << cfg.folds
    << "\nseeds = " << join(cfg.seeds) << "\nthreads = " << cfg.threads
    << "\nprotocol = " << (cfg.protocol == Protocol::kFinal ? "final" : "fold-mean-epoch-max") << '\n';
  return s.str();
}

}  // namespace ringgnn
