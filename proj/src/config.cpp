#include "ratiolab/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ratiolab/moment_matching.hpp"

namespace ratiolab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool full_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool full_long(const std::string& s, long long& out) {
  if (s.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stoll(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool full_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty() || s[0] == '-') return false;
  try {
    std::size_t used = 0;
    out = std::stoull(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

double want_double(int line, const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!full_double(v, out)) fail(line, "key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long long want_int(int line, const std::string& key, const std::string& v) {
  long long out = 0;
  if (!full_long(v, out)) fail(line, "key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool want_bool(int line, const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(line, "key '" + key + "' expects true or false, got '" + v + "'");
}

// Comma-separated positive widths; "none" is the empty list.
std::vector<int> want_widths(int line, const std::string& key, const std::string& v) {
  if (v == "none") return {};
  std::vector<int> widths;
  for (const std::string& part : split(v, ',')) {
    long long w = 0;
    if (!full_long(trim(part), w) || w < 1) {
      fail(line, "key '" + key + "' expects comma-separated positive widths or 'none', got '" + v + "'");
    }
    widths.push_back(static_cast<int>(w));
  }
  return widths;
}

void apply_key(RunConfig& cfg, int line, const std::string& key, const std::string& value) {
  auto guarded = [&](auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      fail(line, e.what());
    }
  };

  if (key == "data.source") {
    cfg.data_source = value;
  } else if (key == "data.gen_source") {
    cfg.gen_source = value;
  } else if (key == "model.latent_dim") {
    const long long v = want_int(line, key, value);
    if (v < 1) fail(line, "model.latent_dim must be >= 1");
    cfg.latent_dim = static_cast<int>(v);
  } else if (key == "model.gen_hidden") {
    cfg.gen_hidden = want_widths(line, key, value);
  } else if (key == "model.ratio_hidden") {
    cfg.ratio_hidden = want_widths(line, key, value);
  } else if (key == "model.head") {
    if (value != "auto") guarded([&] { head_by_name(value); });
    cfg.head = value;
  } else if (key == "model.activation") {
    guarded([&] { activation_by_name(value); });
    cfg.activation = value;
  } else if (key == "loss.ratio") {
    guarded([&] { parse_ratio_loss(value); });
    cfg.train.ratio_loss = value;
  } else if (key == "loss.gen") {
    guarded([&] { parse_gen_loss(value); });
    cfg.train.gen_loss = value;
  } else if (key == "loss.kernel") {
    guarded([&] { parse_kernel(value); });
    cfg.train.loss_kernel = value;
  } else if (key == "train.iterations") {
    const long long v = want_int(line, key, value);
    if (v < 1) fail(line, "train.iterations must be >= 1");
    cfg.train.iterations = static_cast<long>(v);
  } else if (key == "train.batch_size") {
    const long long v = want_int(line, key, value);
    if (v < 1) fail(line, "train.batch_size must be >= 1");
    cfg.train.batch_size = static_cast<Eigen::Index>(v);
  } else if (key == "train.ratio_steps") {
    const long long v = want_int(line, key, value);
    if (v < 1) fail(line, "train.ratio_steps must be >= 1");
    cfg.train.ratio_steps_per_gen_step = static_cast<int>(v);
  } else if (key == "train.optimizer") {
    if (value == "sgd") {
      cfg.train.opt.kind = OptimizerSpec::Kind::sgd;
    } else if (value == "adam") {
      cfg.train.opt.kind = OptimizerSpec::Kind::adam;
    } else {
      fail(line, "train.optimizer must be sgd or adam, got '" + value + "'");
    }
  } else if (key == "train.lr") {
    const double v = want_double(line, key, value);
    if (!(v > 0.0)) fail(line, "train.lr must be positive");
    cfg.train.opt.lr = v;
  } else if (key == "train.beta1" || key == "train.beta2") {
    const double v = want_double(line, key, value);
    if (!(v >= 0.0 && v < 1.0)) fail(line, key + " must lie in [0,1)");
    (key == "train.beta1" ? cfg.train.opt.beta1 : cfg.train.opt.beta2) = v;
  } else if (key == "train.eps") {
    const double v = want_double(line, key, value);
    if (!(v > 0.0)) fail(line, "train.eps must be positive");
    cfg.train.opt.eps = v;
  } else if (key == "train.pi") {
    if (value == "auto") {
      cfg.train.pi_auto = true;
    } else {
      const double v = want_double(line, key, value);
      if (!(v > 0.0 && v < 1.0)) fail(line, "train.pi: constraint 0<pi<1 violated");
      cfg.train.pi_auto = false;
      cfg.train.pi = v;
    }
  } else if (key == "train.instance_noise") {
    const double v = want_double(line, key, value);
    if (!(v >= 0.0)) fail(line, "train.instance_noise must be >= 0");
    cfg.train.instance_noise_std = v;
  } else if (key == "train.seed") {
    std::uint64_t v = 0;
    if (!full_u64(value, v)) fail(line, "train.seed expects an unsigned 64-bit integer");
    cfg.train.seed = v;
  } else if (key == "train.log_every") {
    const long long v = want_int(line, key, value);
    if (v < 1) fail(line, "train.log_every must be >= 1");
    cfg.train.log_every = static_cast<long>(v);
  } else if (key == "train.eval_batch") {
    const long long v = want_int(line, key, value);
    if (v < 2) fail(line, "train.eval_batch must be >= 2");
    cfg.train.eval_batch = static_cast<Eigen::Index>(v);
  } else if (key == "train.eval_kernel") {
    guarded([&] { parse_kernel(value); });
    cfg.train.eval_kernel = value;
  } else if (key == "output.dir") {
    cfg.out_dir = value;
  } else if (key == "output.checkpoint") {
    cfg.write_checkpoint = want_bool(line, key, value);
  } else if (key == "output.recovery_grid") {
    guarded([&] { parse_grid(value); });
    cfg.recovery_grid = value;
  } else {
    fail(line, "unknown key '" + key + "'");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos) {
      fail(line_no, "key '" + key + "' is missing its section prefix");
    }
    if (value.empty()) fail(line_no, "key '" + key + "' has an empty value");
    apply_key(cfg, line_no, key, value);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto widths = [](const std::vector<int>& w) {
    if (w.empty()) return std::string("none");
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(w[i]);
    }
    return s;
  };

  if (!cfg.data_source.empty()) out << "data.source = " << cfg.data_source << '\n';
  if (!cfg.gen_source.empty()) out << "data.gen_source = " << cfg.gen_source << '\n';
  out << "model.latent_dim = " << cfg.latent_dim << '\n';
  out << "model.gen_hidden = " << widths(cfg.gen_hidden) << '\n';
  out << "model.ratio_hidden = " << widths(cfg.ratio_hidden) << '\n';
  out << "model.head = " << cfg.head << '\n';
  out << "model.activation = " << cfg.activation << '\n';
  out << "loss.ratio = " << cfg.train.ratio_loss << '\n';
  out << "loss.gen = " << cfg.train.gen_loss << '\n';
  out << "loss.kernel = " << cfg.train.loss_kernel << '\n';
  out << "train.iterations = " << cfg.train.iterations << '\n';
  out << "train.batch_size = " << cfg.train.batch_size << '\n';
  out << "train.ratio_steps = " << cfg.train.ratio_steps_per_gen_step << '\n';
  out << "train.optimizer = " << (cfg.train.opt.kind == OptimizerSpec::Kind::sgd ? "sgd" : "adam")
      << '\n';
  out << "train.lr = " << num(cfg.train.opt.lr) << '\n';
  out << "train.beta1 = " << num(cfg.train.opt.beta1) << '\n';
  out << "train.beta2 = " << num(cfg.train.opt.beta2) << '\n';
  out << "train.eps = " << num(cfg.train.opt.eps) << '\n';
  out << "train.pi = " << (cfg.train.pi_auto ? std::string("auto") : num(cfg.train.pi)) << '\n';
  out << "train.instance_noise = " << num(cfg.train.instance_noise_std) << '\n';
  out << "train.seed = " << cfg.train.seed << '\n';
  out << "train.log_every = " << cfg.train.log_every << '\n';
  out << "train.eval_batch = " << cfg.train.eval_batch << '\n';
  out << "train.eval_kernel = " << cfg.train.eval_kernel << '\n';
  out << "output.dir = " << cfg.out_dir << '\n';
  out << "output.checkpoint = " << (cfg.write_checkpoint ? "true" : "false") << '\n';
  out << "output.recovery_grid = " << cfg.recovery_grid << '\n';
  return out.str();
}

DistSpec parse_dist_spec(const std::string& text) {
  const auto bad = [&text]() {
    return std::invalid_argument(
        "unknown distribution spec '" + text +
        "' (expected std:<dim>, gaussian:<means>:<vars>, or ring:<modes>:<radius>:<sigma>)");
  };
  auto nums = [&bad](const std::string& s) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(split(s, ',').size()));
    Eigen::Index i = 0;
    for (const std::string& part : split(s, ',')) {
      double v = 0.0;
      if (!full_double(trim(part), v)) throw bad();
      out[i++] = v;
    }
    return out;
  };

  if (text.rfind("std:", 0) == 0) {
    long long dim = 0;
    if (!full_long(text.substr(4), dim) || dim < 1) throw bad();
    return GaussianSpec::standard(static_cast<int>(dim));
  }
  if (text.rfind("gaussian:", 0) == 0) {
    const auto parts = split(text.substr(9), ':');
    if (parts.size() != 2) throw bad();
    return GaussianSpec(nums(parts[0]), nums(parts[1]));
  }
  if (text.rfind("ring:", 0) == 0) {
    const auto parts = split(text.substr(5), ':');
    if (parts.size() != 3) throw bad();
    long long modes = 0;
    double radius = 0.0, sigma = 0.0;
    if (!full_long(parts[0], modes) || !full_double(parts[1], radius) ||
        !full_double(parts[2], sigma)) {
      throw bad();
    }
    return MixtureSpec::ring(static_cast<int>(modes), radius, sigma);
  }
  throw bad();
}

Eigen::MatrixXd load_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);

  std::vector<std::vector<double>> rows;
  std::string raw;
  int line_no = 0;
  Eigen::Index cols = -1;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    std::vector<double> row;
    bool numeric = true;
    for (const std::string& part : split(line, ',')) {
      double v = 0.0;
      if (!full_double(trim(part), v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header row
      throw std::runtime_error(path + " line " + std::to_string(line_no) +
                               ": non-numeric cell in data row");
    }
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) +
                               ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    }
  }
  return out;
}

DataSource make_data_source(const std::string& source_text) {
  if (source_text.rfind("spec:", 0) == 0) {
    return DataSource(parse_dist_spec(source_text.substr(5)));
  }
  if (source_text.rfind("csv:", 0) == 0) {
    return DataSource(load_data_csv(source_text.substr(4)));
  }
  throw std::invalid_argument("data source must be spec:<grammar> or csv:<path>, got '" +
                              source_text + "'");
}

Head resolve_head(const RunConfig& cfg) {
  if (cfg.head != "auto") return head_by_name(cfg.head);
  const RatioLossSpec spec = parse_ratio_loss(cfg.train.ratio_loss);
  return spec.kind == RatioLossKind::cpe ? Head::probability : Head::positive;
}

GridSpec parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  const auto bad = [&text]() {
    return std::invalid_argument("grid must be <lo>:<hi>:<n> with lo < hi and n >= 2, got '" +
                                 text + "'");
  };
  if (parts.size() != 3) throw bad();
  double lo = 0.0, hi = 0.0;
  long long n = 0;
  if (!full_double(parts[0], lo) || !full_double(parts[1], hi) || !full_long(parts[2], n)) {
    throw bad();
  }
  if (!(lo < hi) || n < 2) throw bad();
  return {lo, hi, static_cast<Eigen::Index>(n)};
}

}  // namespace ratiolab
