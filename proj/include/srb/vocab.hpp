#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace srb {

// Token <-> id map with reserved specials at ids 0..3. Word-mode vocabs
// additionally reserve the NE@N anonymization family (PER/LOC/ORG/MISC,
// N = 1..10) right after the specials so entity symbols survive any
// frequency pruning.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kNumSpecials = 4;
  static constexpr int kMaxEntityIndex = 10;

  enum class Mode { Char, Word };

  // Frequency-ranked over all token lists, ties broken by first
  // occurrence, truncated to max_size. Throws std::invalid_argument
  // when max_size cannot hold the reserved symbols.
  static Vocab build(const std::vector<std::vector<std::string>>& texts,
                     int max_size, Mode mode);

  int id(const std::string& token) const;  // kUnk for unknown surfaces
  const std::string& token(int id) const;  // throws on out-of-range ids
  int size() const { return static_cast<int>(tokens_.size()); }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  // One token per line, line number == id.
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

  static const std::vector<std::string>& entity_symbols();

 private:
  void add(const std::string& token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace srb
