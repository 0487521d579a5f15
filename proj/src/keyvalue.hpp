#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace clfpde {

// Line-oriented "[section]" / "key = value" text with '#' comments.
class KvDoc {
 public:
  static KvDoc parse(const std::string& text);
  static KvDoc load(const std::string& path);

  bool has_section(const std::string& section) const;
  const std::string* find(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;  // ConfigInvalid when missing
  std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::vector<std::string> keys(const std::string& section) const;
  std::vector<std::string> section_names() const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  std::string dump() const;

  // Rejects keys outside the allowed list, which catches misspellings.
  void expect_keys(const std::string& section, const std::vector<std::string>& allowed) const;

 private:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };
  std::vector<Section> sections_;
  Section* section(const std::string& name, bool create);
  const Section* section(const std::string& name) const;
};

std::string fmt_vector(const Eigen::VectorXd& v);
std::string fmt_matrix(const Eigen::MatrixXd& m);  // rows separated by ';'
Eigen::VectorXd parse_vector(const std::string& text);
Eigen::MatrixXd parse_matrix(const std::string& text);
bool parse_bool(const std::string& text);

}  // namespace clfpde
