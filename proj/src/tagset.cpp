#include "satire/tagset.hpp"

#include <unordered_map>

namespace satire {

const std::vector<std::string>& penn_tagset() {
  static const std::vector<std::string> tags = {
      "CC",  "CD",  "DT",   "EX",   "FW",  "IN",   "JJ",   "JJR", "JJS",
      "LS",  "MD",  "NN",   "NNS",  "NNP", "NNPS", "PDT",  "POS", "PRP",
      "PRP$", "RB", "RBR",  "RBS",  "RP",  "SYM",  "TO",   "UH",  "VB",
      "VBD", "VBG", "VBN",  "VBP",  "VBZ", "WDT",  "WP",   "WP$", "WRB",
      "#",   "$",   "''",   "(",    ")",   ",",    ".",    ":",   "``"};
  return tags;
}

int tag_id(const std::string& tag) {
  static const std::unordered_map<std::string, int> ids = [] {
    std::unordered_map<std::string, int> m;
    const auto& ts = penn_tagset();
    for (std::size_t i = 0; i < ts.size(); ++i) m[ts[i]] = static_cast<int>(i);
    return m;
  }();
  auto it = ids.find(tag);
  return it == ids.end() ? -1 : it->second;
}

}  // namespace satire
