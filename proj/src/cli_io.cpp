#include "msvar/cli_io.hpp"

#include "msvar/errors.hpp"
#include "msvar/girsanov.hpp"
#include "msvar/linalg.hpp"
#include "msvar/lognormal_pricer.hpp"
#include "msvar/normal_pricer.hpp"
#include "msvar/oracle.hpp"
#include "msvar/rng.hpp"
#include "msvar/term_structure.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

namespace msvar {

using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// JSON reading with field paths

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  fail(ErrorKind::ValidationError, (path.empty() ? std::string("<root>") : path) + ": " + msg);
}

std::string key_path(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string idx_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; });
    if (!known) bad(key_path(path, it.key()), "unknown key");
  }
}

const json& need(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) bad(key_path(path, key), "missing");
  return j.at(key);
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

int read_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  return j.get<int>();
}

Vec read_vec(const json& j, const std::string& path, Eigen::Index len) {
  if (!j.is_array()) bad(path, "expected an array");
  if (len >= 0 && static_cast<Eigen::Index>(j.size()) != len)
    bad(path, "expected " + std::to_string(len) + " entries, found " + std::to_string(j.size()));
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = read_number(j[i], idx_path(path, i));
  return v;
}

Mat read_mat(const json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array()) bad(path, "expected an array of rows");
  if (static_cast<Eigen::Index>(j.size()) != rows)
    bad(path, "expected " + std::to_string(rows) + " rows, found " + std::to_string(j.size()));
  Mat m(rows, cols);
  for (std::size_t i = 0; i < j.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = read_vec(j[i], idx_path(path, i), cols);
  return m;
}

json write_vec(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json write_mat(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(write_vec(m.row(i).transpose()));
  return a;
}

void check_distribution(const Vec& v, const std::string& path) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) < 0.0) bad(path, "negative probability");
  if (std::abs(v.sum() - 1.0) > 1e-12) bad(path, "probabilities sum to " + std::to_string(v.sum()) + ", expected 1");
}

const char* kind_name(MarketSpec::Kind k) {
  switch (k) {
    case MarketSpec::Kind::Normal: return "normal";
    case MarketSpec::Kind::Fx: return "fx";
    case MarketSpec::Kind::Hjm: return "hjm";
  }
  return "normal";
}

}  // namespace

ModelFile parse_model(const json& doc) {
  check_keys(doc, "", {"dims", "regimes", "transition", "initial_dist", "cov_initial", "market", "state"});
  ModelFile f;
  const json& dims = need(doc, "", "dims");
  check_keys(dims, "dims", {"n", "p", "k", "N", "T"});
  const int n = read_int(need(dims, "dims", "n"), "dims.n");
  const int p = read_int(need(dims, "dims", "p"), "dims.p");
  const int k = read_int(need(dims, "dims", "k"), "dims.k");
  const int N = read_int(need(dims, "dims", "N"), "dims.N");
  const int T = read_int(need(dims, "dims", "T"), "dims.T");
  if (n < 1) bad("dims.n", "must be positive");
  if (p < 1) bad("dims.p", "must be positive");
  if (k < 1) bad("dims.k", "must be positive");
  if (N < 1) bad("dims.N", "must be positive");
  if (T < 1) bad("dims.T", "must be positive");

  MsVarModel& m = f.model;
  m.n_regimes = N;
  m.lag_order = p;
  m.dim = n;
  m.exo_dim = k;

  const json& regimes = need(doc, "", "regimes");
  if (!regimes.is_array() || static_cast<int>(regimes.size()) != N)
    bad("regimes", "expected an array of " + std::to_string(N) + " regimes");
  const auto vs = static_cast<Eigen::Index>(vech_size(n));
  ConstantCovariance constant;
  GarchCovariance garch;
  bool any_garch = false, any_constant = false;
  for (std::size_t j = 0; j < regimes.size(); ++j) {
    const std::string rp = idx_path("regimes", j);
    check_keys(regimes[j], rp, {"A", "cov"});
    m.coeff.push_back(read_mat(need(regimes[j], rp, "A"), key_path(rp, "A"), n, k + n * p));
    const json& cov = need(regimes[j], rp, "cov");
    const std::string cp = key_path(rp, "cov");
    check_keys(cov, cp, {"sigma", "garch"});
    if (cov.contains("sigma") == cov.contains("garch")) bad(cp, "expected exactly one of sigma or garch");
    if (cov.contains("sigma")) {
      any_constant = true;
      constant.sigma.push_back(read_mat(cov.at("sigma"), key_path(cp, "sigma"), n, n));
      (void)checked_cholesky(constant.sigma.back(), key_path(cp, "sigma"));
    } else {
      any_garch = true;
      const json& g = cov.at("garch");
      const std::string gp = key_path(cp, "garch");
      check_keys(g, gp, {"b0", "b", "arch_order"});
      if (g.contains("arch_order")) garch.arch_order = read_int(g.at("arch_order"), key_path(gp, "arch_order"));
      garch.b0.push_back(read_vec(need(g, gp, "b0"), key_path(gp, "b0"), vs));
      const json& b = need(g, gp, "b");
      if (!b.is_array()) bad(key_path(gp, "b"), "expected an array of matrices");
      std::vector<Mat> bs;
      for (std::size_t q = 0; q < b.size(); ++q) bs.push_back(read_mat(b[q], idx_path(key_path(gp, "b"), q), vs, vs));
      garch.b.push_back(std::move(bs));
    }
  }
  if (any_constant && any_garch) bad("regimes", "all regimes must use the same covariance form");
  if (any_garch) {
    const json& init = need(doc, "", "cov_initial");
    if (!init.is_array()) bad("cov_initial", "expected an array of matrices");
    for (std::size_t q = 0; q < init.size(); ++q) garch.initial.push_back(read_mat(init[q], idx_path("cov_initial", q), n, n));
    for (std::size_t j = 0; j < garch.b.size(); ++j)
      if (garch.b[j].size() != garch.initial.size())
        bad(idx_path("regimes", j) + ".cov.garch.b", "needs one matrix per entry of cov_initial");
    m.cov = garch;
  } else {
    if (doc.contains("cov_initial")) bad("cov_initial", "only valid with garch covariances");
    m.cov = constant;
  }

  m.transition = read_mat(need(doc, "", "transition"), "transition", N, N);
  for (int i = 0; i < N; ++i) check_distribution(m.transition.row(i).transpose(), idx_path("transition", static_cast<std::size_t>(i)));
  m.initial_dist = read_vec(need(doc, "", "initial_dist"), "initial_dist", N);
  check_distribution(m.initial_dist, "initial_dist");

  const json& market = need(doc, "", "market");
  if (!market.is_object()) bad("market", "expected an object");
  const json& kind = need(market, "market", "kind");
  if (!kind.is_string()) bad("market.kind", "expected a string");
  const std::string kname = kind.get<std::string>();
  if (kname == "normal") {
    check_keys(market, "market", {"kind", "n_z", "n_x", "rate"});
    f.market.kind = MarketSpec::Kind::Normal;
    f.market.normal.n_z = read_int(need(market, "market", "n_z"), "market.n_z");
    f.market.normal.n_x = read_int(need(market, "market", "n_x"), "market.n_x");
    f.market.normal.rate = read_number(need(market, "market", "rate"), "market.rate");
  } else if (kname == "fx") {
    check_keys(market, "market", {"kind", "n_z", "n_d", "n_f"});
    f.market.kind = MarketSpec::Kind::Fx;
    f.market.fx.n_z = read_int(need(market, "market", "n_z"), "market.n_z");
    f.market.fx.n_d = read_int(need(market, "market", "n_d"), "market.n_d");
    const json& nf = need(market, "market", "n_f");
    if (!nf.is_array()) bad("market.n_f", "expected an array of per-country counts");
    for (std::size_t i = 0; i < nf.size(); ++i) f.market.fx.n_f_country.push_back(read_int(nf[i], idx_path("market.n_f", i)));
  } else if (kname == "hjm") {
    check_keys(market, "market", {"kind"});
    f.market.kind = MarketSpec::Kind::Hjm;
    f.market.hjm = HjmLayout{T, n};
  } else {
    bad("market.kind", "expected normal, fx or hjm");
  }
  try {
    switch (f.market.kind) {
      case MarketSpec::Kind::Normal: f.market.normal.validate(n); break;
      case MarketSpec::Kind::Fx: f.market.fx.validate(n); break;
      case MarketSpec::Kind::Hjm: f.market.hjm.validate(); break;
    }
  } catch (const Error& e) {
    bad("market", e.what());
  }

  const json& st = need(doc, "", "state");
  check_keys(st, "state", {"y0", "psi", "observed", "regimes"});
  const json& y0 = need(st, "state", "y0");
  if (p == 1 && y0.is_array() && !y0.empty() && y0[0].is_number()) {
    f.state.initial.push_back(read_vec(y0, "state.y0", n));
  } else {
    if (!y0.is_array() || static_cast<int>(y0.size()) != p) bad("state.y0", "expected " + std::to_string(p) + " lag vectors");
    for (std::size_t i = 0; i < y0.size(); ++i) f.state.initial.push_back(read_vec(y0[i], idx_path("state.y0", i), n));
  }
  const json& psi = need(st, "state", "psi");
  if (!psi.is_array() || static_cast<int>(psi.size()) != T) bad("state.psi", "expected " + std::to_string(T) + " vectors");
  for (std::size_t i = 0; i < psi.size(); ++i) f.state.exogenous.push_back(read_vec(psi[i], idx_path("state.psi", i), k));
  if (st.contains("observed")) {
    const json& obs = st.at("observed");
    if (!obs.is_array() || static_cast<int>(obs.size()) >= T) bad("state.observed", "expected fewer than T vectors");
    for (std::size_t i = 0; i < obs.size(); ++i) f.state.observed.push_back(read_vec(obs[i], idx_path("state.observed", i), n));
  }
  if (st.contains("regimes")) {
    const json& r = st.at("regimes");
    if (!r.is_array() || r.size() != f.state.observed.size()) bad("state.regimes", "expected one regime per observed period");
    RegimePath prefix;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const int s = read_int(r[i], idx_path("state.regimes", i));
      if (s < 0 || s >= N) bad(idx_path("state.regimes", i), "regime out of range");
      prefix.push_back(s);
    }
    f.regimes = prefix;
  }

  const ValidatedModel vm(f.model);
  try {
    validate_state(vm, f.state);
  } catch (const Error& e) {
    bad("state", e.what());
  }
  return f;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot read " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  return parse_model(doc);
}

json serialize_model(const ModelFile& f) {
  const MsVarModel& m = f.model;
  json doc;
  doc["dims"] = {{"n", m.dim}, {"p", m.lag_order}, {"k", m.exo_dim}, {"N", m.n_regimes}, {"T", f.state.horizon()}};
  json regimes = json::array();
  for (int j = 0; j < m.n_regimes; ++j) {
    json r;
    r["A"] = write_mat(m.coeff[static_cast<std::size_t>(j)]);
    if (const auto* c = std::get_if<ConstantCovariance>(&m.cov)) {
      r["cov"] = {{"sigma", write_mat(c->sigma[static_cast<std::size_t>(j)])}};
    } else {
      const auto& g = std::get<GarchCovariance>(m.cov);
      json bs = json::array();
      for (const auto& b : g.b[static_cast<std::size_t>(j)]) bs.push_back(write_mat(b));
      r["cov"] = {{"garch", {{"arch_order", g.arch_order}, {"b0", write_vec(g.b0[static_cast<std::size_t>(j)])}, {"b", bs}}}};
    }
    regimes.push_back(r);
  }
  doc["regimes"] = regimes;
  if (const auto* g = std::get_if<GarchCovariance>(&m.cov)) {
    json init = json::array();
    for (const auto& s : g->initial) init.push_back(write_mat(s));
    doc["cov_initial"] = init;
  }
  doc["transition"] = write_mat(m.transition);
  doc["initial_dist"] = write_vec(m.initial_dist);
  json market = {{"kind", kind_name(f.market.kind)}};
  switch (f.market.kind) {
    case MarketSpec::Kind::Normal:
      market["n_z"] = f.market.normal.n_z;
      market["n_x"] = f.market.normal.n_x;
      market["rate"] = f.market.normal.rate;
      break;
    case MarketSpec::Kind::Fx:
      market["n_z"] = f.market.fx.n_z;
      market["n_d"] = f.market.fx.n_d;
      market["n_f"] = f.market.fx.n_f_country;
      break;
    case MarketSpec::Kind::Hjm: break;
  }
  doc["market"] = market;
  json st;
  if (m.lag_order == 1) {
    st["y0"] = write_vec(f.state.initial.front());
  } else {
    json y0 = json::array();
    for (const auto& v : f.state.initial) y0.push_back(write_vec(v));
    st["y0"] = y0;
  }
  json psi = json::array();
  for (const auto& v : f.state.exogenous) psi.push_back(write_vec(v));
  st["psi"] = psi;
  if (!f.state.observed.empty()) {
    json obs = json::array();
    for (const auto& v : f.state.observed) obs.push_back(write_vec(v));
    st["observed"] = obs;
  }
  if (f.regimes) st["regimes"] = *f.regimes;
  doc["state"] = st;
  return doc;
}

std::vector<ParameterDraw> parse_draws(const json& doc, const ModelFile& base) {
  check_keys(doc, "", {"draws"});
  const json& draws = need(doc, "", "draws");
  if (!draws.is_array()) bad("draws", "expected an array");
  const json base_doc = serialize_model(base);
  std::vector<ParameterDraw> out;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const std::string dp = idx_path("draws", i);
    check_keys(draws[i], dp, {"regimes", "transition", "initial_dist", "cov_initial", "weight"});
    json merged = base_doc;
    merged.erase("cov_initial");
    for (const char* key : {"regimes", "transition", "initial_dist", "cov_initial"})
      if (draws[i].contains(key)) merged[key] = draws[i].at(key);
    double weight = 1.0;
    if (draws[i].contains("weight")) weight = read_number(draws[i].at("weight"), key_path(dp, "weight"));
    if (!(weight > 0.0)) bad(key_path(dp, "weight"), "must be positive");
    try {
      out.push_back({ValidatedModel(parse_model(merged).model), weight});
    } catch (const Error& e) {
      fail(e.kind(), dp + "." + e.what());
    }
  }
  return out;
}

std::vector<ParameterDraw> load_draws(const std::string& path, const ModelFile& base) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot read " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  return parse_draws(doc, base);
}

// ---------------------------------------------------------------------------
// Output

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return std::to_string(std::get<long long>(c));
}

}  // namespace

void write_table(std::ostream& out, const Table& table, OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv: {
      for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv_field(table.columns[i]);
      out << "\r\n";
      for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(cell_text(row[i]));
        out << "\r\n";
      }
      return;
    }
    case OutputFormat::Json: {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& row : table.rows) {
        nlohmann::ordered_json o = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
          const auto& c = row[i];
          // An empty cell (no standard error for a closed form) becomes null.
          if (const auto* s = std::get_if<std::string>(&c))
            o[table.columns[i]] = s->empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(*s);
          else if (const auto* d = std::get_if<double>(&c))
            o[table.columns[i]] = *d;
          else
            o[table.columns[i]] = std::get<long long>(c);
        }
        rows.push_back(o);
      }
      out << rows.dump(2) << "\n";
      return;
    }
    case OutputFormat::Table: {
      std::vector<std::size_t> width(table.columns.size());
      for (std::size_t i = 0; i < width.size(); ++i) width[i] = table.columns[i].size();
      for (const auto& row : table.rows)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], cell_text(row[i]).size());
      auto line = [&](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (i) s += "  ";
          s += cells[i];
          if (i + 1 < cells.size()) s.append(width[i] - cells[i].size(), ' ');
        }
        out << s << "\n";
      };
      line(table.columns);
      for (const auto& row : table.rows) {
        std::vector<std::string> cells;
        for (const auto& c : row) cells.push_back(cell_text(c));
        line(cells);
      }
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Globals {
  std::string model;
  std::string draws;
  std::string condition;
  std::string output = "table";
  std::size_t mc_paths = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool validate = false;
};

struct Session {
  ModelFile file;
  std::optional<ValidatedModel> model;
  PathState state;
  Conditioning cond;
  std::string cond_label;
  std::vector<ParameterDraw> draws;
  McOptions mc;
  bool validate = false;

  [[nodiscard]] const ValidatedModel& base() const { return *model; }
  [[nodiscard]] int T() const { return state.horizon(); }
  [[nodiscard]] int t() const { return state.time(); }
};

[[noreturn]] void usage(const std::string& msg) { fail(ErrorKind::Usage, msg); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

int parse_int_arg(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    usage("invalid integer for " + what + ": '" + s + "'");
  }
}

double parse_double_arg(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    usage("invalid number for " + what + ": '" + s + "'");
  }
}

std::string path_label(const RegimePath& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "-" : "") + std::to_string(p[i]);
  return s;
}

void apply_condition(Session& s, const std::string& arg) {
  auto set_known = [&](RegimePath prefix) {
    if (static_cast<int>(prefix.size()) != s.state.time())
      fail(ErrorKind::ValidationError, "condition: regime prefix length must equal the observed length");
    for (int r : prefix)
      if (r < 0 || r >= s.base().N()) fail(ErrorKind::ValidationError, "condition: regime out of range");
    s.cond_label = "known:" + (prefix.empty() ? std::string("none") : path_label(prefix));
    s.cond = Conditioning::known(std::move(prefix));
  };
  auto set_filtered = [&] {
    s.cond = Conditioning::filtered();
    s.cond_label = "filtered";
  };
  if (arg.empty()) {
    if (s.file.regimes)
      set_known(*s.file.regimes);
    else if (s.state.time() == 0)
      set_known({});
    else
      set_filtered();
    return;
  }
  if (arg == "filter") return set_filtered();
  if (arg == "none") return set_known({});
  if (std::filesystem::is_regular_file(arg)) {
    std::ifstream in(arg);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      fail(ErrorKind::ParseError, arg + ": " + e.what());
    }
    check_keys(doc, "", {"observed", "regimes"});
    const json& obs = need(doc, "", "observed");
    if (!obs.is_array() || static_cast<int>(obs.size()) >= s.T()) bad("observed", "expected fewer than T vectors");
    s.state.observed.clear();
    for (std::size_t i = 0; i < obs.size(); ++i) s.state.observed.push_back(read_vec(obs[i], idx_path("observed", i), s.base().n()));
    validate_state(s.base(), s.state);
    if (!doc.contains("regimes")) return set_filtered();
    RegimePath prefix;
    const json& r = doc.at("regimes");
    if (!r.is_array()) bad("regimes", "expected an array");
    for (std::size_t i = 0; i < r.size(); ++i) prefix.push_back(read_int(r[i], idx_path("regimes", i)));
    return set_known(std::move(prefix));
  }
  RegimePath prefix;
  for (const auto& part : split(arg, ',')) prefix.push_back(parse_int_arg(part, "--condition"));
  set_known(std::move(prefix));
}

Session open_session(const Globals& g) {
  if (g.model.empty()) usage("--model is required");
  Session s;
  s.file = load_model(g.model);
  s.model.emplace(s.file.model);
  s.state = s.file.state;
  apply_condition(s, g.condition);
  if (!g.draws.empty()) s.draws = load_draws(g.draws, s.file);
  s.mc.paths = g.mc_paths;
  s.mc.seed = g.seed;
  s.mc.threads = g.threads;
  s.validate = g.validate;
  return s;
}

const NormalMarket& need_normal(const Session& s) {
  if (s.file.market.kind != MarketSpec::Kind::Normal) usage("this command needs a normal market model");
  return s.file.market.normal;
}

const FxMarket& need_fx(const Session& s) {
  if (s.file.market.kind != MarketSpec::Kind::Fx) usage("this command needs an fx market model");
  return s.file.market.fx;
}

const HjmLayout& need_hjm(const Session& s) {
  if (s.file.market.kind != MarketSpec::Kind::Hjm) usage("this command needs an hjm market model");
  return s.file.market.hjm;
}

KernelFactory pricing_kernel(const Session& s, const ValidatedModel& model, const PathState& state) {
  switch (s.file.market.kind) {
    case MarketSpec::Kind::Normal: return normal_kernel(model, s.file.market.normal);
    case MarketSpec::Kind::Fx: return lognormal_kernel(model, s.file.market.fx);
    case MarketSpec::Kind::Hjm: return hjm_kernel(model, s.file.market.hjm, state);
  }
  return zero_kernel(model);
}

std::vector<WeightedPath> oracle_paths(const Session& s, const ValidatedModel& model, const PathState& state) {
  if (s.file.market.kind == MarketSpec::Kind::Hjm) return hjm_paths(model, state, s.cond);
  return conditioning_paths(model, state, s.cond, pricing_kernel(s, model, state));
}

OptionSide parse_side(const std::string& s) {
  if (s == "call") return OptionSide::Call;
  if (s == "put") return OptionSide::Put;
  usage("--type must be call or put");
}

/// One row: contract, conditioning, price, se [, mc_price, mc_se, delta].
Table price_row(const Session& s, const std::string& contract,
                const std::function<Estimate(const ValidatedModel&)>& price, bool mc_based,
                const std::function<PathFunctional(const ValidatedModel&)>& oracle_payoff) {
  Table tab;
  tab.columns = {"contract", "conditioning", "price", "se"};
  std::vector<Cell> row{contract, s.cond_label};
  if (!s.draws.empty()) {
    std::vector<double> vals, weights;
    for (const auto& d : s.draws) {
      vals.push_back(price(d.model).estimate);
      weights.push_back(d.weight);
    }
    const Estimate e = weighted_mean(vals, weights);
    row.push_back(e.estimate);
    row.push_back(e.standard_error);
  } else {
    const Estimate e = price(s.base());
    row.push_back(e.estimate);
    row.push_back(mc_based ? Cell(e.standard_error) : Cell(std::string()));
  }
  if (s.validate) {
    tab.columns.insert(tab.columns.end(), {"mc_price", "mc_se", "delta"});
    auto mc_for = [&](const ValidatedModel& model) {
      return mc_price_many(model, s.state, oracle_paths(s, model, s.state), pricing_kernel(s, model, s.state),
                           {oracle_payoff(model)}, s.mc)
          .front();
    };
    Estimate mc;
    if (s.draws.empty()) {
      mc = mc_for(s.base());
    } else {
      double wsum = 0.0, mean = 0.0, var = 0.0;
      for (const auto& d : s.draws) wsum += d.weight;
      for (const auto& d : s.draws) {
        const Estimate e = mc_for(d.model);
        const double w = d.weight / wsum;
        mean += w * e.estimate;
        var += w * w * e.standard_error * e.standard_error;
      }
      mc = {mean, std::sqrt(var)};
    }
    row.push_back(mc.estimate);
    row.push_back(mc.standard_error);
    row.push_back(std::get<double>(row[2]) - mc.estimate);
  }
  tab.rows.push_back(std::move(row));
  return tab;
}

Estimate exact(double v) { return {v, 0.0}; }

/// Σ over the price rows of the trajectory at time m.
double log_weighted(const Mat& w, const Mat& m2, const Trajectory& y, int upto) {
  double z = 0.0;
  for (int m = 1; m <= upto; ++m)
    if (!w.row(m - 1).isZero(0.0)) z += w.row(m - 1).dot(m2 * y.at(m));
  return z;
}

Table cmd_price_normal(const Session& s, const std::string& weights, double strike, const std::string& type) {
  const NormalMarket& market = need_normal(s);
  const OptionSide side = parse_side(type);
  const auto parts = split(weights, ':');
  if (parts.size() != 2) usage("--weights expects european:i, asian:i or basket:v1,v2,...");
  WeightScheme scheme;
  if (parts[0] == "european")
    scheme = arithmetic_weight_builder(WeightKind::European, market.n_x, s.T(), parse_int_arg(parts[1], "--weights"));
  else if (parts[0] == "asian")
    scheme = arithmetic_weight_builder(WeightKind::Asian, market.n_x, s.T(), parse_int_arg(parts[1], "--weights"));
  else if (parts[0] == "basket") {
    const auto vals = split(parts[1], ',');
    Vec b(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) b(static_cast<Eigen::Index>(i)) = parse_double_arg(vals[i], "--weights");
    scheme = arithmetic_weight_builder(WeightKind::Basket, market.n_x, s.T(), 0, b);
  } else {
    usage("--weights expects european:i, asian:i or basket:v1,v2,...");
  }
  const Mat m2 = market.m2();
  const double disc = std::pow(1.0 + market.rate, -(s.T() - s.t()));
  const int T = s.T();
  return price_row(
      s, "normal:" + weights + ":" + type,
      [&](const ValidatedModel& model) {
        return exact(price_normal_option(model, market, scheme, strike, side, s.state, s.cond).price);
      },
      false,
      [&](const ValidatedModel&) -> PathFunctional {
        return [=](const Trajectory& y) {
          const double x = log_weighted(scheme.weights, m2, y, T);
          return disc * (side == OptionSide::Call ? std::max(x - strike, 0.0) : std::max(strike - x, 0.0));
        };
      });
}

PathFunctional exchange_payoff(const FxMarket& market, const ExchangeSpec& ex, int t) {
  const Mat m2 = market.m2();
  const PathFunctional disc = rate_discount(market.domestic_rate_coord(), t, ex.maturity);
  return [=](const Trajectory& y) {
    const double a = ex.w0 * std::exp(log_weighted(ex.w, m2, y, ex.maturity));
    const double b = ex.w0_hat * std::exp(log_weighted(ex.w_hat, m2, y, ex.maturity));
    return a > b ? disc(y) * (a - b) : 0.0;
  };
}

Table cmd_price_margrabe(const Session& s, const SpecialCase& sc) {
  const FxMarket& market = need_fx(s);
  const ExchangeSpec ex = special_case_weights(market, sc, s.T());
  return price_row(
      s, "margrabe:case" + std::to_string(sc.case_no) + (sc.side == OptionSide::Call ? ":call" : ":put"),
      [&](const ValidatedModel& model) { return exact(price_exchange_option(model, market, ex, s.state, s.cond)); },
      false, [&](const ValidatedModel&) { return exchange_payoff(market, ex, s.t()); });
}

Table cmd_price_general(const Session& s, const std::string& contract) {
  const FxMarket& market = need_fx(s);
  std::ifstream in(contract);
  if (!in) fail(ErrorKind::ParseError, "cannot read " + contract);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, contract + ": " + e.what());
  }
  check_keys(doc, "", {"weights", "strike", "strike_time"});
  GeneralCallSpec spec;
  spec.weights = read_mat(need(doc, "", "weights"), "weights", s.T(), market.n_x());
  spec.strike = read_number(need(doc, "", "strike"), "strike");
  spec.strike_time = read_int(need(doc, "", "strike_time"), "strike_time");
  const Mat rx = market.r2() * market.m2();
  const int t = s.t(), T = s.T(), dc = market.domestic_rate_coord();
  return price_row(
      s, "general:" + std::filesystem::path(contract).filename().string(),
      [&](const ValidatedModel& model) { return price_general_call(model, market, spec, s.state, s.cond, s.mc); }, true,
      [&](const ValidatedModel&) -> PathFunctional {
        return [=](const Trajectory& y) {
          double log_disc = 0.0, total = 0.0;
          if (spec.strike_time == t) total -= spec.strike;
          for (int u = t + 1; u <= T; ++u) {
            log_disc -= y.at(u - 1)(dc);
            if (u == spec.strike_time) total -= std::exp(log_disc) * spec.strike;
            const Vec lx = rx * y.at(u);
            double v = 0.0;
            for (Eigen::Index j = 0; j < lx.size(); ++j)
              if (spec.weights(u - 1, j) != 0.0) v += spec.weights(u - 1, j) * std::exp(lx(j));
            total += std::exp(log_disc) * v;
          }
          return std::max(total, 0.0);
        };
      });
}

double forward_from_curve(const Trajectory& y, int v, int u1, int u2) {
  double f = 0.0;
  for (int m = u1; m <= u2 - 1; ++m) f += y.at(v)(m - v);
  return f / (u2 - u1);
}

Table cmd_price_rate(const Session& s, const std::string& which, const RateOptionSpec& spec) {
  const HjmLayout& layout = need_hjm(s);
  const bool libor = which.rfind("libor-", 0) == 0;
  const bool cap = which == "caplet" || which == "libor-caplet";
  RateOptionSpec sp = spec;
  sp.side = cap ? OptionSide::Call : OptionSide::Put;
  const PathFunctional disc = rate_discount(0, s.t(), sp.u2);
  return price_row(
      s, which + ":" + std::to_string(sp.v) + ":" + std::to_string(sp.u1) + ":" + std::to_string(sp.u2),
      [&](const ValidatedModel& model) {
        return exact(libor ? price_libor_caplet(model, layout, s.state, sp, s.cond)
                           : price_forward_caplet(model, layout, s.state, sp, s.cond));
      },
      false,
      [&](const ValidatedModel&) -> PathFunctional {
        return [=](const Trajectory& y) {
          const double f = forward_from_curve(y, sp.v, sp.u1, sp.u2);
          const double acc = sp.u2 - sp.u1;
          const double x = libor ? std::expm1(acc * f) / acc : f;
          const double pay = cap ? std::max(x - sp.strike, 0.0) : std::max(sp.strike - x, 0.0);
          return pay == 0.0 ? 0.0 : disc(y) * pay;
        };
      });
}

Table cmd_price_zcb_option(const Session& s, int v, int u, double strike, const std::string& type) {
  const HjmLayout& layout = need_hjm(s);
  const OptionSide side = parse_side(type);
  const PathFunctional disc = rate_discount(0, s.t(), v);
  return price_row(
      s, "zcb-option:" + std::to_string(v) + ":" + std::to_string(u) + ":" + type,
      [&](const ValidatedModel& model) {
        return exact(price_zcb_option(model, layout, s.state, v, u, strike, side, s.cond));
      },
      false,
      [&](const ValidatedModel&) -> PathFunctional {
        return [=](const Trajectory& y) {
          const double b = std::exp(curve_log_bond(y.at(v), v, u));
          const double pay = side == OptionSide::Call ? std::max(b - strike, 0.0) : std::max(strike - b, 0.0);
          return pay == 0.0 ? 0.0 : disc(y) * pay;
        };
      });
}

Table cmd_curve_zcb(Session s, int from, int to, int foreign) {
  if (from < 0) from = s.t();
  if (from > s.t()) fail(ErrorKind::IndexOutOfRange, "--from exceeds the observed length");
  if (from < s.t()) {
    s.state = s.state.truncated(from);
    if (s.cond.kind == Conditioning::Kind::KnownPrefix) {
      s.cond.prefix.resize(static_cast<std::size_t>(from));
      s.cond_label = "known:" + (s.cond.prefix.empty() ? std::string("none") : path_label(s.cond.prefix));
    }
  }
  if (to <= from || to > s.T()) fail(ErrorKind::IndexOutOfRange, "--to must lie in (from, T]");
  const std::string contract = "zcb:" + std::to_string(from) + ":" + std::to_string(to) +
                               (foreign >= 0 ? ":foreign" + std::to_string(foreign) : "");
  switch (s.file.market.kind) {
    case MarketSpec::Kind::Normal: {
      if (foreign >= 0) usage("--foreign needs an fx market model");
      const double r = s.file.market.normal.rate;
      return price_row(
          s, contract, [&](const ValidatedModel&) { return exact(std::pow(1.0 + r, -(to - from))); }, false,
          [&](const ValidatedModel&) { return constant_discount(r, from, to); });
    }
    case MarketSpec::Kind::Fx: {
      const FxMarket& market = s.file.market.fx;
      const int coord = foreign >= 0 ? market.foreign_rate_coord(foreign) : market.domestic_rate_coord();
      if (foreign >= market.n_q()) fail(ErrorKind::IndexOutOfRange, "--foreign out of range");
      return price_row(
          s, contract,
          [&](const ValidatedModel& model) {
            return exact(foreign >= 0 ? zcb_foreign(model, market, foreign, s.state, to, s.cond).price
                                      : zcb_domestic(model, market, s.state, to, s.cond).price);
          },
          false, [&](const ValidatedModel&) { return rate_discount(coord, from, to); });
    }
    case MarketSpec::Kind::Hjm: {
      if (foreign >= 0) usage("--foreign needs an fx market model");
      const HjmLayout& layout = s.file.market.hjm;
      return price_row(
          s, contract,
          [&](const ValidatedModel& model) { return exact(hjm_zcb(model, layout, s.state, to, s.cond).price); }, false,
          [&](const ValidatedModel&) { return rate_discount(0, from, to); });
    }
  }
  return {};
}

Table cmd_simulate(const Session& s, const std::string& measure, std::size_t paths, std::uint64_t seed) {
  if (measure != "real" && measure != "q") usage("--measure must be real or q");
  const ValidatedModel& model = s.base();
  const bool q = measure == "q";
  const KernelFactory kernel = q ? pricing_kernel(s, model, s.state) : zero_kernel(model);
  const auto wp = s.file.market.kind == MarketSpec::Kind::Hjm || !q
                      ? conditioning_paths(model, s.state, s.cond, zero_kernel(model))
                      : conditioning_paths(model, s.state, s.cond, kernel);
  Vec probs(static_cast<Eigen::Index>(wp.size()));
  for (std::size_t i = 0; i < wp.size(); ++i) probs(static_cast<Eigen::Index>(i)) = wp[i].weight;
  Table tab;
  tab.columns = {"path", "regimes", "time"};
  for (int j = 0; j < model.n(); ++j) tab.columns.push_back("y" + std::to_string(j));
  for (std::size_t i = 0; i < paths; ++i) {
    const std::uint64_t si = substream_seed(seed, i);
    RandomStream pick(substream_seed(si, 1));
    const RegimePath& path = wp[static_cast<std::size_t>(pick.categorical(probs))].path;
    const Trajectory traj = q ? simulate_under_q(model, s.state, path, kernel(path, covariance_path(model, path)), si)
                              : simulate_real_path(model, s.state, path, si);
    for (int m = s.t() + 1; m <= s.T(); ++m) {
      std::vector<Cell> row{static_cast<long long>(i), path_label(path), static_cast<long long>(m)};
      for (int j = 0; j < model.n(); ++j) row.push_back(traj.at(m)(j));
      tab.rows.push_back(std::move(row));
    }
  }
  return tab;
}

Table cmd_kernel(const Session& s, const std::string& objective, const std::string& regimes) {
  if (objective != "entropy" && objective != "variance") usage("--objective must be entropy or variance");
  const ValidatedModel& model = s.base();
  RegimePath path;
  if (regimes.empty()) {
    path = s.cond.kind == Conditioning::Kind::KnownPrefix ? s.cond.prefix : RegimePath(static_cast<std::size_t>(s.t()), 0);
    path.resize(static_cast<std::size_t>(s.T()), path.empty() ? 0 : path.back());
  } else {
    for (const auto& part : split(regimes, ',')) path.push_back(parse_int_arg(part, "--regimes"));
  }
  model.check_path(path, static_cast<std::size_t>(s.T()));
  const auto sigma = covariance_path(model, path);
  const bool variance = objective == "variance";

  std::vector<int> times;
  std::vector<Vec> thetas;
  std::vector<Mat> used_sigma;
  if (s.file.market.kind == MarketSpec::Kind::Hjm) {
    const auto cs = hjm_constraints(model, s.file.market.hjm, path, s.state);
    const std::vector<Mat> fut(sigma.begin() + s.t(), sigma.end());
    Vec theta = Vec::Zero(model.n() * (s.T() - s.t()));
    if (cs.constraint.a.rows() > 0)
      theta = variance ? variance_kernel(fut, cs.constraint).theta : entropy_kernel(fut, cs.constraint);
    for (int m = s.t() + 1; m <= s.T(); ++m) {
      times.push_back(m);
      thetas.push_back(theta.segment((m - s.t() - 1) * model.n(), model.n()));
      used_sigma.push_back(sigma[static_cast<std::size_t>(m - 1)]);
    }
  } else {
    const bool normal = s.file.market.kind == MarketSpec::Kind::Normal;
    const GirsanovKernel gk = normal ? market_kernel_normal(model, s.file.market.normal, path, s.state)
                                     : market_kernel_lognormal(model, s.file.market.fx, path, s.state);
    const Mat m2 = normal ? s.file.market.normal.m2() : s.file.market.fx.m2();
    for (std::size_t i = 0; i < gk.theta.size(); ++i) {
      const Mat& sg = sigma[i];
      times.push_back(static_cast<int>(i) + 1);
      thetas.push_back(variance ? variance_kernel({sg}, KernelConstraint{m2, m2 * gk.theta[i]}).theta : gk.theta[i]);
      used_sigma.push_back(sg);
    }
  }
  Table tab;
  tab.columns = {"regimes", "t", "component", "theta"};
  Vec stacked(static_cast<Eigen::Index>(thetas.size()) * model.n());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    stacked.segment(static_cast<Eigen::Index>(i) * model.n(), model.n()) = thetas[i];
    for (int j = 0; j < model.n(); ++j)
      tab.rows.push_back({path_label(path), static_cast<long long>(times[i]), static_cast<long long>(j), thetas[i](j)});
  }
  const double obj = variance ? variance_objective(used_sigma, stacked) : entropy_objective(used_sigma, stacked);
  tab.rows.push_back({path_label(path), std::string("objective"), objective, obj});
  return tab;
}

int exit_code_for(ErrorKind kind) {
  if (kind == ErrorKind::Usage) return 2;
  return is_validation_kind(kind) ? 3 : 4;
}

void report_error(std::ostream& err, bool as_json, const std::string& kind, const std::string& message) {
  if (as_json)
    err << json{{"error", kind}, {"message", message}}.dump() << "\n";
  else
    err << "error: " << message << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regime-switching VAR derivative pricer", "msvar"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--model", g.model, "model file (JSON)");
  app.add_option("--draws", g.draws, "parameter draw file (JSON)");
  app.add_option("--condition", g.condition, "regime prefix 'i,j,...', 'none', 'filter', or a data file");
  app.add_option("--mc-paths", g.mc_paths, "Monte Carlo sample count")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--output", g.output, "table, csv or json")->check(CLI::IsMember({"table", "csv", "json"}));
  app.add_option("--threads", g.threads, "worker threads, 0 for all cores");
  app.add_flag("--validate", g.validate, "add a Monte Carlo cross-check");

  auto* price = app.add_subcommand("price", "price a contract");
  price->require_subcommand(1);
  price->fallthrough();

  std::string weights, type = "call";
  double strike = 0.0;
  auto* p_normal = price->add_subcommand("normal", "weighted-price option in the normal market")->fallthrough();
  p_normal->add_option("--weights", weights, "european:i, asian:i or basket:v1,v2,...")->required();
  p_normal->add_option("--strike", strike, "strike")->required();
  p_normal->add_option("--type", type, "call or put");

  SpecialCase sc;
  std::string mtype = "call";
  std::optional<double> mstrike;
  auto* p_margrabe = price->add_subcommand("margrabe", "exchange option, one of nine listed cases")->fallthrough();
  p_margrabe->add_option("--case", sc.case_no, "case number 1..9")->required()->check(CLI::Range(1, 9));
  p_margrabe->add_option("--first", sc.first, "first leg asset or country index");
  p_margrabe->add_option("--first-sub", sc.first_sub, "first leg asset within the country");
  p_margrabe->add_option("--second", sc.second, "second leg asset or country index");
  p_margrabe->add_option("--second-sub", sc.second_sub, "second leg asset within the country");
  p_margrabe->add_option("--units1", sc.first_units, "units of the first leg");
  p_margrabe->add_option("--units2", sc.second_units, "units of the second leg");
  p_margrabe->add_option("--strike", mstrike, "cash strike for cases 1-3");
  int maturity = -1;
  p_margrabe->add_option("--maturity", maturity, "exercise time (default T)");
  p_margrabe->add_option("--type", mtype, "call or put");

  std::string contract;
  auto* p_general = price->add_subcommand("general", "general European call in the fx market")->fallthrough();
  p_general->add_option("--contract", contract, "contract file (JSON)")->required();

  RateOptionSpec rate;
  std::vector<CLI::App*> rate_cmds;
  for (const char* name : {"caplet", "floorlet", "libor-caplet", "libor-floorlet"}) {
    auto* c = price->add_subcommand(name, std::string(name) + " on a forward rate")->fallthrough();
    c->add_option("--fix", rate.v, "fixing time v")->required();
    c->add_option("--start", rate.u1, "accrual start u1")->required();
    c->add_option("--end", rate.u2, "accrual end u2")->required();
    c->add_option("--strike", rate.strike, "strike rate")->required();
    rate_cmds.push_back(c);
  }
  int zexp = 0, zmat = 0;
  double zstrike = 0.0;
  std::string ztype = "call";
  auto* p_zcbo = price->add_subcommand("zcb-option", "option on a zero-coupon bond")->fallthrough();
  p_zcbo->add_option("--expiry", zexp, "option expiry v")->required();
  p_zcbo->add_option("--maturity", zmat, "bond maturity u")->required();
  p_zcbo->add_option("--strike", zstrike, "strike")->required();
  p_zcbo->add_option("--type", ztype, "call or put");

  auto* curve = app.add_subcommand("curve", "term structure")->fallthrough();
  curve->require_subcommand(1);
  int cfrom = -1, cto = 0, cforeign = -1;
  auto* c_zcb = curve->add_subcommand("zcb", "zero-coupon bond price")->fallthrough();
  c_zcb->add_option("--from", cfrom, "pricing time (default: observed length)");
  c_zcb->add_option("--to", cto, "maturity")->required();
  c_zcb->add_option("--foreign", cforeign, "foreign country index");

  std::string measure = "real";
  std::size_t sim_paths = 1;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "simulate trajectories")->fallthrough();
  sim->add_option("--measure", measure, "real or q");
  sim->add_option("--paths", sim_paths, "number of trajectories");
  sim->add_option("--seed", sim_seed, "seed (defaults to the global seed)");

  std::string objective = "entropy", kregimes;
  auto* kern = app.add_subcommand("kernel", "Girsanov kernel along one regime path")->fallthrough();
  kern->add_option("--objective", objective, "entropy or variance");
  kern->add_option("--regimes", kregimes, "full regime path i,j,...");

  std::vector<const char*> args(argv, argv + argc);
  try {
    app.parse(static_cast<int>(args.size()), args.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    report_error(err, g.output == "json", "Usage", e.what());
    if (g.output != "json") err << app.help();
    return 2;
  }
  const bool as_json = g.output == "json";
  const OutputFormat fmt = g.output == "csv" ? OutputFormat::Csv : as_json ? OutputFormat::Json : OutputFormat::Table;
  try {
    Session s = open_session(g);
    Table tab;
    if (p_normal->parsed()) {
      tab = cmd_price_normal(s, weights, strike, type);
    } else if (p_margrabe->parsed()) {
      sc.side = parse_side(mtype);
      sc.strike = mstrike;
      sc.maturity = maturity < 0 ? s.T() : maturity;
      tab = cmd_price_margrabe(s, sc);
    } else if (p_general->parsed()) {
      tab = cmd_price_general(s, contract);
    } else if (p_zcbo->parsed()) {
      tab = cmd_price_zcb_option(s, zexp, zmat, zstrike, ztype);
    } else if (c_zcb->parsed()) {
      tab = cmd_curve_zcb(s, cfrom, cto, cforeign);
    } else if (sim->parsed()) {
      tab = cmd_simulate(s, measure, sim_paths, sim_seed.value_or(g.seed));
    } else if (kern->parsed()) {
      tab = cmd_kernel(s, objective, kregimes);
    } else {
      bool done = false;
      for (auto* c : rate_cmds)
        if (c->parsed()) {
          tab = cmd_price_rate(s, c->get_name(), rate);
          done = true;
        }
      if (!done) usage("missing subcommand");
    }
    write_table(out, tab, fmt);
    return 0;
  } catch (const Error& e) {
    report_error(err, as_json, std::string(to_string(e.kind())), e.what());
    if (e.kind() == ErrorKind::Usage && !as_json) err << app.help();
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error(err, as_json, "Internal", e.what());
    return 4;
  }
}

}  // namespace msvar
