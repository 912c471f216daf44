#include "airdemand/classifier.hpp"

#include <fstream>
#include <sstream>

#include "airdemand/errors.hpp"
#include "airdemand/gradient_boosting.hpp"
#include "airdemand/linear_model.hpp"
#include "airdemand/neural_net.hpp"
#include "airdemand/random_forest.hpp"

#include <json.hpp>

namespace airdemand {

std::unique_ptr<Classifier> classifier_from_json(const std::string& text) {
  std::size_t start = text.find_first_not_of(" \t\r\n");
  if (start == std::string::npos) throw FormatError("empty classifier payload");

  if (text[start] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("classifier JSON parse failed: ") + e.what());
    }
    const std::string kind = doc.value("kind", "");
    if (kind == "lr") return wrap_lr(lr_from_json(text));
    if (kind == "ann") return wrap_ann(ann_from_json(text));
    throw FormatError("unknown classifier kind: '" + kind + "'");
  }

  std::istringstream in(text.substr(start));
  std::string kind;
  in >> kind;
  if (kind == "rf") return wrap_rf(rf_parse(text));
  if (kind == "gb") return wrap_gb(gb_parse(text));
  throw FormatError("unknown classifier kind: '" + kind + "'");
}

std::unique_ptr<Classifier> load_classifier(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return classifier_from_json(buf.str());
}

void save_classifier(const Classifier& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write model file: " + path);
  out << model.serialize();
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace airdemand
