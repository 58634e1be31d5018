#include "flround/instance_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "flround/errors.hpp"

namespace flround {

const char* kind_name(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::kUfl: return "ufl";
    case InstanceKind::kTwoStage: return "two-stage";
    case InstanceKind::kRobust: return "robust";
  }
  return "?";
}

const UflInstance& InstanceFile::base() const {
  switch (kind) {
    case InstanceKind::kTwoStage: return two_stage.base;
    case InstanceKind::kRobust: return robust.base;
    default: return ufl;
  }
}

namespace {

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::size_t offset() const { return pos_; }

  bool at_end() {
    skip();
    return pos_ >= text_.size();
  }

  std::string_view peek() {
    skip();
    std::size_t e = pos_;
    while (e < text_.size() && !space(text_[e]) && text_[e] != '#') ++e;
    return text_.substr(pos_, e - pos_);
  }

  std::string_view word(const char* what) {
    if (at_end()) throw ParseError(pos_, std::string("unexpected end of input, expected ") + what);
    std::string_view w = peek();
    pos_ += w.size();
    return w;
  }

  void expect(std::string_view keyword) {
    const std::size_t at = (skip(), pos_);
    std::string_view w = word(std::string(keyword).c_str());
    if (w != keyword) throw ParseError(at, "expected " + std::string(keyword) + ", found '" + std::string(w) + "'");
  }

  double number(const char* what) {
    const std::size_t at = (skip(), pos_);
    std::string_view w = word(what);
    double v = 0.0;
    auto [end, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || end != w.data() + w.size())
      throw ParseError(at, std::string("expected ") + what + ", found '" + std::string(w) + "'");
    return v;
  }

  double cost(const char* what) {
    const std::size_t at = (skip(), pos_);
    const double v = number(what);
    if (!(v >= 0.0) || v == std::numeric_limits<double>::infinity())
      throw ParseError(at, std::string(what) + " must be a finite nonnegative number");
    return v;
  }

  std::int64_t integer(const char* what) {
    const std::size_t at = (skip(), pos_);
    std::string_view w = word(what);
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || end != w.data() + w.size())
      throw ParseError(at, std::string("expected integer ") + what + ", found '" + std::string(w) + "'");
    return v;
  }

  std::size_t count(const char* what) {
    const std::size_t at = (skip(), pos_);
    const std::int64_t v = integer(what);
    if (v < 0) throw ParseError(at, std::string(what) + " must be nonnegative");
    return static_cast<std::size_t>(v);
  }

 private:
  static bool space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

  void skip() {
    while (pos_ < text_.size()) {
      if (space(text_[pos_])) {
        ++pos_;
      } else if (text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void validate_at(std::size_t offset, const auto& validate) {
  try {
    validate();
  } catch (const ParseError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ParseError(offset, e.what());
  }
}

}  // namespace

UflInstance parse_orlib(std::string_view text) {
  Lexer lex(text);
  const std::size_t m = lex.count("facility count");
  const std::size_t n = lex.count("client count");
  if (m == 0) throw ParseError(0, "facility count must be positive");
  UflInstance inst;
  for (std::size_t i = 0; i < m; ++i) {
    lex.word("capacity");
    inst.open_cost.push_back(lex.cost("opening cost"));
    inst.facility_ids.push_back(static_cast<std::int64_t>(i + 1));
  }
  inst.conn.assign(m * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    inst.client_ids.push_back(static_cast<std::int64_t>(j + 1));
    lex.cost("demand");
    for (std::size_t i = 0; i < m; ++i) inst.conn[i * n + j] = lex.cost("allocation cost");
  }
  if (!lex.at_end()) throw ParseError(lex.offset(), "trailing data after the last client block");
  validate_at(0, [&] { inst.validate(); });
  return inst;
}

InstanceFile parse_text_instance(std::string_view text) {
  Lexer lex(text);
  InstanceFile out;
  out.format = FileFormat::kText;
  lex.expect("FORMAT");
  const std::size_t kind_at = lex.offset();
  const std::string_view kind = lex.word("instance kind");
  if (kind == "ufl") out.kind = InstanceKind::kUfl;
  else if (kind == "two-stage") out.kind = InstanceKind::kTwoStage;
  else if (kind == "robust") out.kind = InstanceKind::kRobust;
  else throw ParseError(kind_at, "unknown instance kind '" + std::string(kind) + "'");

  UflInstance g;
  lex.expect("FACILITIES");
  const std::size_t m = lex.count("facility count");
  if (m == 0) throw ParseError(lex.offset(), "facility count must be positive");
  for (std::size_t i = 0; i < m; ++i) {
    g.facility_ids.push_back(lex.integer("facility id"));
    g.open_cost.push_back(lex.cost("opening cost"));
  }
  lex.expect("CLIENTS");
  const std::size_t n = lex.count("client count");
  std::map<std::int64_t, std::size_t> client_index;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t at = lex.offset();
    const std::int64_t id = lex.integer("client id");
    if (!client_index.emplace(id, j).second) throw ParseError(at, "duplicate client id " + std::to_string(id));
    g.client_ids.push_back(id);
  }
  lex.expect("COSTS");
  g.conn.assign(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) g.conn[i * n + j] = lex.cost("connection cost");
  validate_at(lex.offset(), [&] { g.validate(); });

  if (out.kind == InstanceKind::kUfl) {
    out.ufl = std::move(g);
  } else if (out.kind == InstanceKind::kTwoStage) {
    lex.expect("SCENARIOS");
    const std::size_t s = lex.count("scenario count");
    out.two_stage.base = std::move(g);
    for (std::size_t a = 0; a < s; ++a) {
      Scenario sc;
      sc.probability = lex.cost("scenario probability");
      const std::size_t c = lex.count("scenario client count");
      for (std::size_t q = 0; q < c; ++q) {
        const std::size_t at = lex.offset();
        const std::int64_t id = lex.integer("client id");
        auto it = client_index.find(id);
        if (it == client_index.end()) throw ParseError(at, "scenario names unknown client " + std::to_string(id));
        sc.clients.push_back(it->second);
      }
      std::sort(sc.clients.begin(), sc.clients.end());
      if (lex.peek() == "|") lex.word("|");
      for (std::size_t i = 0; i < m; ++i) sc.open_cost.push_back(lex.cost("second-stage cost"));
      out.two_stage.scenarios.push_back(std::move(sc));
    }
    validate_at(lex.offset(), [&] { out.two_stage.validate(); });
  } else {
    lex.expect("ROBUST_K");
    const std::size_t at = lex.offset();
    out.robust.k = static_cast<int>(lex.count("k"));
    out.robust.base = std::move(g);
    validate_at(at, [&] { out.robust.validate(); });
  }
  if (!lex.at_end()) throw ParseError(lex.offset(), "trailing data after the instance");
  return out;
}

InstanceFile parse_instance(std::string_view text) {
  Lexer lex(text);
  if (!lex.at_end() && lex.peek() == "FORMAT") return parse_text_instance(text);
  InstanceFile out;
  out.format = FileFormat::kOrlib;
  out.kind = InstanceKind::kUfl;
  out.ufl = parse_orlib(text);
  return out;
}

InstanceFile read_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

namespace {

void put(std::string& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

void put(std::string& out, std::int64_t v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

void put_costs(std::string& out, const UflInstance& g) {
  for (std::size_t i = 0; i < g.num_facilities(); ++i) {
    for (std::size_t j = 0; j < g.num_clients(); ++j) {
      if (j) out += ' ';
      put(out, g.c(i, j));
    }
    out += '\n';
  }
}

}  // namespace

std::string serialize_instance(const InstanceFile& file, FileFormat format) {
  const UflInstance& g = file.base();
  std::string out;
  if (format == FileFormat::kOrlib) {
    if (file.kind != InstanceKind::kUfl) throw InvalidInput("OR-Library output holds plain UFL instances only");
    put(out, static_cast<std::int64_t>(g.num_facilities()));
    out += ' ';
    put(out, static_cast<std::int64_t>(g.num_clients()));
    out += '\n';
    for (double f : g.open_cost) {
      out += "0 ";
      put(out, f);
      out += '\n';
    }
    for (std::size_t j = 0; j < g.num_clients(); ++j) {
      out += "1\n";
      for (std::size_t i = 0; i < g.num_facilities(); ++i) {
        if (i) out += ' ';
        put(out, g.c(i, j));
      }
      out += '\n';
    }
    return out;
  }
  out += "FORMAT ";
  out += kind_name(file.kind);
  out += "\nFACILITIES ";
  put(out, static_cast<std::int64_t>(g.num_facilities()));
  out += '\n';
  for (std::size_t i = 0; i < g.num_facilities(); ++i) {
    put(out, g.facility_ids[i]);
    out += ' ';
    put(out, g.open_cost[i]);
    out += '\n';
  }
  out += "CLIENTS ";
  put(out, static_cast<std::int64_t>(g.num_clients()));
  out += '\n';
  for (std::size_t j = 0; j < g.num_clients(); ++j) {
    if (j) out += ' ';
    put(out, g.client_ids[j]);
  }
  out += "\nCOSTS\n";
  put_costs(out, g);
  if (file.kind == InstanceKind::kTwoStage) {
    out += "SCENARIOS ";
    put(out, static_cast<std::int64_t>(file.two_stage.scenarios.size()));
    out += '\n';
    for (const Scenario& sc : file.two_stage.scenarios) {
      put(out, sc.probability);
      out += ' ';
      put(out, static_cast<std::int64_t>(sc.clients.size()));
      for (std::size_t j : sc.clients) {
        out += ' ';
        put(out, g.client_ids[j]);
      }
      out += " |";
      for (double f : sc.open_cost) {
        out += ' ';
        put(out, f);
      }
      out += '\n';
    }
  } else if (file.kind == InstanceKind::kRobust) {
    out += "ROBUST_K ";
    put(out, static_cast<std::int64_t>(file.robust.k));
    out += '\n';
  }
  return out;
}

void write_instance_file(const std::string& path, const InstanceFile& file, FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  out << serialize_instance(file, format);
}

}  // namespace flround
