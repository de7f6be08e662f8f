#pragma once

#include <string>
#include <vector>

namespace satire {

// Penn Treebank tagset: the 36 word tags in their conventional order,
// followed by the punctuation tags. Declaration order fixes the stylistic
// feature order and the tagger's tie-breaking.
const std::vector<std::string>& penn_tagset();

// Index into penn_tagset(), or -1 when the tag is not in the set.
int tag_id(const std::string& tag);

}  // namespace satire
