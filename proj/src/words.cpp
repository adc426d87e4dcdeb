#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

#include "fuller/models.hpp"

namespace fuller {

namespace {

int letter_key(int l) { return 2 * (std::abs(l) - 1) + (l < 0 ? 1 : 0); }

bool word_less(const Word& a, const Word& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](int x, int y) { return letter_key(x) < letter_key(y); });
}

long lattice_gcd(const LatticeVector& v) {
  long g = 0;
  for (long c : v) g = std::gcd(g, std::labs(c));
  return g;
}

}  // namespace

Word free_reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (int l : w) {
    if (l == 0) fail(ErrorKind::InvalidInput, "letter 0 is not a generator");
    if (!out.empty() && out.back() == -l)
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

Word cyclic_reduce(const Word& w) {
  Word r = free_reduce(w);
  std::size_t lo = 0, hi = r.size();
  while (hi - lo >= 2 && r[lo] == -r[hi - 1]) {
    ++lo;
    --hi;
  }
  return Word(r.begin() + static_cast<long>(lo), r.begin() + static_cast<long>(hi));
}

Word least_rotation(const Word& w) {
  Word best = w;
  Word rot = w;
  for (std::size_t s = 1; s < w.size(); ++s) {
    std::rotate(rot.begin(), rot.begin() + 1, rot.end());
    if (word_less(rot, best)) best = rot;
  }
  return best;
}

Word inverse_word(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (int& l : out) l = -l;
  return out;
}

std::string word_to_string(const Word& w) {
  if (w.empty()) return "1";
  std::string s;
  for (int l : w) {
    s += static_cast<char>('a' + std::abs(l) - 1);
    if (l < 0) s += '\'';
  }
  return s;
}

bool FreeHomotopyClass::constant() const {
  if (is_word) return word.empty();
  return std::all_of(lattice.begin(), lattice.end(), [](long c) { return c == 0; });
}

std::string to_string(const FreeHomotopyClass& cls) {
  std::string s;
  if (cls.is_word) {
    s = word_to_string(cls.word);
  } else {
    s = "(";
    for (std::size_t i = 0; i < cls.lattice.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(cls.lattice[i]);
    }
    s += ")";
  }
  return cls.lifted ? s + "~" : s;
}

PowerDecomposition power_decomposition(const FreeHomotopyClass& cls) {
  if (cls.constant()) fail(ErrorKind::ConstantClass, "constant class has no root");
  PowerDecomposition out{cls, 1};
  if (!cls.is_word) {
    long g = lattice_gcd(cls.lattice);
    for (long& c : out.root.lattice) c /= g;
    out.n = static_cast<int>(g);
    return out;
  }
  const Word& w = cls.word;
  const std::size_t len = w.size();
  for (std::size_t p = 1; p <= len; ++p) {
    if (len % p) continue;
    bool periodic = true;
    for (std::size_t i = p; i < len && periodic; ++i) periodic = w[i] == w[i - p];
    if (periodic) {
      out.root.word = Word(w.begin(), w.begin() + static_cast<long>(p));
      out.n = static_cast<int>(len / p);
      return out;
    }
  }
  return out;
}

FreeHomotopyClass class_power(const FreeHomotopyClass& root, int n) {
  if (n < 1) fail(ErrorKind::InvalidInput, "power must be positive");
  FreeHomotopyClass out = root;
  if (root.is_word) {
    out.word.clear();
    for (int k = 0; k < n; ++k) out.word.insert(out.word.end(), root.word.begin(), root.word.end());
    out.word = least_rotation(cyclic_reduce(out.word));
  } else {
    for (long& c : out.lattice) c *= n;
  }
  return out;
}

FreeHomotopyClass canonical_class(const RawClass& raw, const ModelSpace& model) {
  FreeHomotopyClass cls;
  if (std::holds_alternative<LatticeVector>(raw)) {
    if (!model.lattice_classes())
      fail(ErrorKind::InvalidInput, "model " + model.describe() + " expects a word class");
    cls.lattice = std::get<LatticeVector>(raw);
    if (static_cast<int>(cls.lattice.size()) != model.lattice_dim())
      fail(ErrorKind::InvalidInput, "lattice class has " + std::to_string(cls.lattice.size()) +
                                        " entries, model needs " + std::to_string(model.lattice_dim()));
    return cls;
  }
  if (model.lattice_classes())
    fail(ErrorKind::InvalidInput, "model " + model.describe() + " expects a lattice class");
  const int alphabet = model.alphabet_size();
  for (int l : std::get<Word>(raw)) {
    if (l == 0 || std::abs(l) > alphabet)
      fail(ErrorKind::UnknownGenerator, "letter index " + std::to_string(l) + " outside alphabet of size " +
                                            std::to_string(alphabet));
  }
  cls.is_word = true;
  cls.word = least_rotation(cyclic_reduce(std::get<Word>(raw)));
  return cls;
}

Word parse_word(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  Word w;
  if (s == "1") return w;
  for (char c : s) {
    if (c == '\'') {
      if (w.empty()) fail(ErrorKind::InvalidInput, "dangling ' in '" + s + "'");
      w.back() = -w.back();
      continue;
    }
    if (c < 'a' || c > 'z') fail(ErrorKind::UnknownGenerator, std::string("letter '") + c + "'");
    w.push_back(c - 'a' + 1);
  }
  return w;
}

FreeHomotopyClass parse_class(std::string_view text, const ModelSpace& model) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (!s.empty() && s.front() == '(') {
    if (s.back() != ')') fail(ErrorKind::InvalidInput, "unbalanced lattice class '" + std::string(text) + "'");
    LatticeVector v;
    std::stringstream in(s.substr(1, s.size() - 2));
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stol(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::logic_error&) {
        fail(ErrorKind::InvalidInput, "bad lattice entry '" + item + "'");
      }
    }
    return canonical_class(v, model);
  }
  return canonical_class(parse_word(s), model);
}

// ---------------------------------------------------------------------------

FreeHomotopyClass ClassMap::apply(const FreeHomotopyClass& cls) const {
  FreeHomotopyClass out = cls;
  if (cls.is_word) {
    if (!is_substitution()) fail(ErrorKind::InvalidInput, "lattice map applied to a word class");
    Word w;
    for (int l : cls.word) {
      const auto k = static_cast<std::size_t>(std::abs(l) - 1);
      if (k >= images.size()) fail(ErrorKind::UnknownGenerator, "substitution misses generator " + std::to_string(l));
      Word img = l > 0 ? images[k] : inverse_word(images[k]);
      w.insert(w.end(), img.begin(), img.end());
    }
    out.word = least_rotation(cyclic_reduce(w));
    return out;
  }
  if (is_substitution()) fail(ErrorKind::InvalidInput, "substitution applied to a lattice class");
  Eigen::VectorXi v(static_cast<int>(cls.lattice.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = static_cast<int>(cls.lattice[static_cast<std::size_t>(i)]);
  Eigen::VectorXi r = matrix * v;
  for (int i = 0; i < v.size(); ++i) out.lattice[static_cast<std::size_t>(i)] = r(i);
  return out;
}

FreeHomotopyClass ClassMap::apply_inverse(const FreeHomotopyClass& cls) const {
  ClassMap inv;
  inv.images = inverse_images;
  inv.matrix = inverse_matrix;
  return inv.apply(cls);
}

ClassMap substitution_map(std::vector<Word> images, std::vector<Word> inverse_images) {
  if (images.size() != inverse_images.size())
    fail(ErrorKind::InvalidInput, "substitution and inverse have different alphabets");
  ClassMap m;
  m.images = std::move(images);
  m.inverse_images = std::move(inverse_images);
  // inverse(image(g)) must reduce to g for every generator
  for (std::size_t k = 0; k < m.images.size(); ++k) {
    Word back;
    for (int l : m.images[k]) {
      const auto j = static_cast<std::size_t>(std::abs(l) - 1);
      if (j >= m.inverse_images.size()) fail(ErrorKind::UnknownGenerator, "substitution image uses unknown letter");
      Word img = l > 0 ? m.inverse_images[j] : inverse_word(m.inverse_images[j]);
      back.insert(back.end(), img.begin(), img.end());
    }
    back = free_reduce(back);
    if (back != Word{static_cast<int>(k) + 1})
      fail(ErrorKind::InvalidInput, "inverse substitution does not undo generator " + std::to_string(k + 1));
  }
  return m;
}

ClassMap lattice_map(const Eigen::MatrixXi& m) {
  if (m.rows() != m.cols()) fail(ErrorKind::InvalidInput, "lattice map must be square");
  const double det = m.cast<double>().determinant();
  if (std::abs(std::abs(det) - 1.0) > 1e-9) fail(ErrorKind::InvalidInput, "lattice map is not unimodular");
  ClassMap out;
  out.matrix = m;
  Mat inv = m.cast<double>().inverse();
  out.inverse_matrix = inv.array().round().cast<int>().matrix();
  return out;
}

}  // namespace fuller
