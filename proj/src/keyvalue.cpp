#include "keyvalue.hpp"

#include <fstream>
#include <sstream>

#include "clfpde/error.hpp"
#include "format.hpp"

namespace clfpde {

KvDoc KvDoc::parse(const std::string& text) {
  KvDoc doc;
  std::istringstream in(text);
  std::string line;
  Section* current = nullptr;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(number);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::ConfigInvalid, where + ": unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw Error(ErrorCode::ConfigInvalid, where + ": empty section name");
      if (doc.section(name)) throw Error(ErrorCode::ConfigInvalid, where + ": duplicate section [" + name + "]");
      current = doc.section(name, true);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigInvalid, where + ": expected key = value");
    if (!current) throw Error(ErrorCode::ConfigInvalid, where + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::ConfigInvalid, where + ": empty key");
    for (const auto& [k, v] : current->entries)
      if (k == key) throw Error(ErrorCode::ConfigInvalid, where + ": duplicate key '" + key + "'");
    current->entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return doc;
}

KvDoc KvDoc::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

KvDoc::Section* KvDoc::section(const std::string& name, bool create) {
  for (auto& s : sections_)
    if (s.name == name) return &s;
  if (!create) return nullptr;
  sections_.push_back(Section{name, {}});
  return &sections_.back();
}

const KvDoc::Section* KvDoc::section(const std::string& name) const {
  for (const auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

bool KvDoc::has_section(const std::string& name) const { return section(name) != nullptr; }

const std::string* KvDoc::find(const std::string& sec, const std::string& key) const {
  const Section* s = section(sec);
  if (!s) return nullptr;
  for (const auto& [k, v] : s->entries)
    if (k == key) return &v;
  return nullptr;
}

std::string KvDoc::get(const std::string& sec, const std::string& key) const {
  const std::string* v = find(sec, key);
  if (!v) throw Error(ErrorCode::ConfigInvalid, "missing key '" + key + "' in [" + sec + "]");
  return *v;
}

std::string KvDoc::get_or(const std::string& sec, const std::string& key, const std::string& fallback) const {
  const std::string* v = find(sec, key);
  return v ? *v : fallback;
}

std::vector<std::string> KvDoc::keys(const std::string& sec) const {
  std::vector<std::string> out;
  if (const Section* s = section(sec))
    for (const auto& [k, v] : s->entries) out.push_back(k);
  return out;
}

std::vector<std::string> KvDoc::section_names() const {
  std::vector<std::string> out;
  for (const auto& s : sections_) out.push_back(s.name);
  return out;
}

void KvDoc::set(const std::string& sec, const std::string& key, const std::string& value) {
  Section* s = section(sec, true);
  for (auto& [k, v] : s->entries)
    if (k == key) {
      v = value;
      return;
    }
  s->entries.emplace_back(key, value);
}

std::string KvDoc::dump() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& s : sections_) {
    if (!first) os << '\n';
    first = false;
    os << '[' << s.name << "]\n";
    for (const auto& [k, v] : s.entries) os << k << " = " << v << '\n';
  }
  return os.str();
}

void KvDoc::expect_keys(const std::string& sec, const std::vector<std::string>& allowed) const {
  for (const auto& k : keys(sec)) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == k;
    if (!ok) throw Error(ErrorCode::ConfigInvalid, "unknown key '" + k + "' in [" + sec + "]");
  }
}

std::string fmt_vector(const Eigen::VectorXd& v) {
  return join_doubles(std::vector<double>(v.data(), v.data() + v.size()));
}

std::string fmt_matrix(const Eigen::MatrixXd& m) {
  std::string out;
  for (int r = 0; r < m.rows(); ++r) {
    if (r) out += "; ";
    out += fmt_vector(m.row(r).transpose());
  }
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text) {
  if (trim(text).empty()) return Eigen::VectorXd();
  const auto values = parse_doubles(text);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<int>(values.size()));
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
  if (trim(text).empty()) return Eigen::MatrixXd();
  const auto rows = split(text, ';');
  Eigen::MatrixXd m;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Eigen::VectorXd row = parse_vector(rows[r]);
    if (r == 0) m.resize(static_cast<int>(rows.size()), row.size());
    if (row.size() != m.cols()) throw Error(ErrorCode::ConfigInvalid, "ragged matrix '" + text + "'");
    m.row(static_cast<int>(r)) = row.transpose();
  }
  return m;
}

bool parse_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw Error(ErrorCode::ConfigInvalid, "expected a boolean, got '" + text + "'");
}

}  // namespace clfpde
