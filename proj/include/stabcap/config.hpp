#ifndef STABCAP_CONFIG_HPP
#define STABCAP_CONFIG_HPP

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "stabcap/ams.hpp"
#include "stabcap/channels.hpp"
#include "stabcap/models.hpp"
#include "stabcap/policies.hpp"

namespace stabcap {

using nlohmann::json;

// Accessor over a JSON config that names the offending key on every failure.
class ConfigView {
 public:
  ConfigView(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const;
  ConfigView at(const std::string& key) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long long integer(const std::string& key) const;
  long long integer_or(const std::string& key, long long fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  std::vector<double> number_list(const std::string& key) const;
  std::vector<long long> integer_list(const std::string& key) const;

 private:
  const json* j_;
  std::string path_;
};

json load_config_file(const std::string& path);

// Builders from the documented config schema.
SystemModel parse_model(const ConfigView& config);
ChannelModel parse_channel(const ConfigView& config);
ZoomPolicyConfig parse_policy(const ConfigView& config);
MatrixXd parse_matrix(const ConfigView& parent, const std::string& key);
Box parse_box(const ConfigView& parent, const std::string& key, int dimension);

// Serializers used to embed the resolved configuration in reports.
json model_to_json(const SystemModel& model);
json channel_to_json(const ChannelModel& channel);
json policy_to_json(const ZoomPolicyConfig& policy);

// Transition matrix from CSV (rows = inputs, comma-separated probabilities).
MatrixXd read_matrix_csv(const std::string& path);

}  // namespace stabcap

#endif
