#pragma once

#include <compare>
#include <string>

namespace philoscope {

// Identifies one translation: (text, passage, model).
struct TranslationKey {
  std::string text;
  int passage = 0;
  std::string model;

  friend auto operator<=>(const TranslationKey&, const TranslationKey&) = default;
  friend bool operator==(const TranslationKey&, const TranslationKey&) = default;
};

inline std::string to_string(const TranslationKey& key) {
  return key.text + ":" + std::to_string(key.passage) + ":" + key.model;
}

}  // namespace philoscope
