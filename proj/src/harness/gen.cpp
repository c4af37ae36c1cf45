#include "tdp/harness.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace tdp {

std::string to_string(Shape s) {
  switch (s) {
  case Shape::Narrow: return "narrow";
  case Shape::Wide: return "wide";
  case Shape::Looped: return "looped";
  }
  return "?";
}

namespace {

const char *const kInputNames[] = {"a", "b", "c", "d", "e", "f"};
const char *const kCmp[] = {"<", "<=", ">", ">=", "==", "!="};

class ProgramGen {
public:
  ProgramGen(std::mt19937_64 &rng, const GenOptions &opts)
      : rng_(rng), opts_(opts) {}

  std::string generate(const std::string &name, Shape shape) {
    out_.str("");
    std::size_t max_in = std::min<std::size_t>(opts_.max_inputs, 6);
    std::size_t n_inputs = pick(opts_.min_inputs, max_in);
    inputs_.assign(kInputNames, kInputNames + n_inputs);
    branches_ = pick(opts_.min_branches, opts_.max_branches);

    out_ << "program " << name << ";\n";
    if (shape == Shape::Looped)
      out_ << "sym n in [0, " << opts_.max_trips << "];\n";
    for (const auto &in : inputs_)
      out_ << "sym " << in << " in [" << opts_.domain_lo << ", "
           << opts_.domain_hi << "];\n";
    out_ << "\n";
    switch (shape) {
    case Shape::Narrow: narrow(); break;
    case Shape::Wide: wide(); break;
    case Shape::Looped: looped(); break;
    }
    return out_.str();
  }

private:
  std::size_t pick(std::size_t lo, std::size_t hi) {
    if (hi <= lo)
      return lo;
    return lo + static_cast<std::size_t>(rng_() % (hi - lo + 1));
  }
  std::int64_t value() {
    auto span = static_cast<std::uint64_t>(opts_.domain_hi - opts_.domain_lo);
    return opts_.domain_lo + static_cast<std::int64_t>(rng_() % (span + 1));
  }
  const std::string &input() { return inputs_[pick(0, inputs_.size() - 1)]; }
  const char *cmp() { return kCmp[pick(0, 5)]; }
  bool chance(unsigned percent) { return rng_() % 100 < percent; }

  std::string atom() {
    std::ostringstream s;
    unsigned r = static_cast<unsigned>(rng_() % 100);
    if (r < 50) {
      s << input() << ' ' << cmp() << ' ' << value();
    } else if (r < 75) {
      s << input() << ' ' << cmp() << ' ' << input();
    } else if (r < 90) {
      s << input() << " + " << input() << ' ' << cmp() << ' ' << value();
    } else {
      s << input() << " * " << pick(2, 3) << ' ' << cmp() << ' ' << value();
    }
    return s.str();
  }

  std::string cond() {
    if (chance(12))
      return atom() + (chance(50) ? " and " : " or ") + atom();
    return atom();
  }

  void line(int indent, const std::string &text) {
    out_ << std::string(static_cast<std::size_t>(indent) * 2, ' ') << text
         << '\n';
  }

  void leaf(int indent, std::size_t k) {
    if (chance(20))
      line(indent, "error(\"e" + std::to_string(k) + "\");");
    else
      line(indent, "exit(" + std::to_string(k) + ");");
  }

  // A comb: each test either leaves the program or falls through.
  void narrow() {
    line(1, "acc = 0;");
    for (std::size_t k = 0; k < branches_; ++k) {
      line(1, "if (" + cond() + ") {");
      if (chance(50)) {
        line(2, "acc = acc + " + input() + ";");
        if (chance(40)) {
          line(2, "if (" + cond() + ") {");
          leaf(3, k + 10);
          line(2, "}");
        }
      }
      if (chance(60))
        leaf(2, k + 1);
      line(1, "}");
      if (chance(25)) {
        line(1, "t = " + std::to_string(pick(0, 3)) + ";");
        line(1, "if (t > 1) {");
        line(2, "acc = acc - t;");
        line(1, "}");
      }
    }
    line(1, "if (acc > " + std::to_string(value()) + ") {");
    leaf(2, 90);
    line(1, "}");
    line(1, "exit(0);");
  }

  // Independent tests in sequence: the tree doubles at each one unless
  // earlier tests on the same input constrain it.
  void wide() {
    line(1, "acc = 0;");
    std::size_t n = std::max(branches_, 2 * inputs_.size());
    std::vector<std::string> seen;
    for (std::size_t k = 0; k < n; ++k) {
      std::int64_t w = static_cast<std::int64_t>(pick(1, 4));
      std::string c;
      if (!seen.empty() && chance(20))
        c = seen[pick(0, seen.size() - 1)];
      else if (chance(70))
        c = inputs_[k % inputs_.size()] + ' ' + cmp() + ' ' +
            std::to_string(value());
      else
        c = cond();
      seen.push_back(c);
      line(1, "if (" + c + ") {");
      line(2, "acc = acc + " + std::to_string(w) + ";");
      line(1, "} else {");
      line(2, "acc = acc - " + std::to_string(w) + ";");
      line(1, "}");
    }
    line(1, "if (acc > 0) {");
    leaf(2, 1);
    line(1, "}");
    line(1, "exit(0);");
  }

  // A loop bounded by input n, re-testing input conditions per iteration.
  void looped() {
    line(1, "acc = 0;");
    line(1, "i = 0;");
    line(1, "while (i < n) {");
    std::size_t body = std::max<std::size_t>(1, branches_ / 3);
    for (std::size_t k = 0; k < body; ++k) {
      if (chance(30))
        line(2, "if (" + input() + " > i) {");
      else
        line(2, "if (" + cond() + ") {");
      line(3, "acc = acc + " + input() + ";");
      line(2, "} else {");
      line(3, "acc = acc - 1;");
      line(2, "}");
    }
    line(2, "i = i + 1;");
    line(1, "}");
    line(1, "if (acc > " + std::to_string(value()) + ") {");
    leaf(2, 1);
    line(1, "} else {");
    line(2, "if (" + cond() + ") {");
    leaf(3, 2);
    line(2, "}");
    line(1, "}");
    line(1, "exit(0);");
  }

  std::mt19937_64 &rng_;
  const GenOptions &opts_;
  std::ostringstream out_;
  std::vector<std::string> inputs_;
  std::size_t branches_ = 0;
};

} // namespace

std::vector<GeneratedProgram> gen_corpus(std::uint64_t seed, std::size_t count,
                                         const GenOptions &opts) {
  if (opts.domain_lo > opts.domain_hi || opts.min_inputs == 0 ||
      opts.min_inputs > opts.max_inputs || opts.max_trips < 0)
    throw std::invalid_argument("inconsistent generator options");
  std::mt19937_64 rng(seed);
  ProgramGen gen(rng, opts);
  std::vector<GeneratedProgram> out;
  static const Shape kCycle[] = {Shape::Narrow, Shape::Wide, Shape::Looped};
  for (std::size_t i = 0; i < count; ++i) {
    Shape shape = kCycle[i % 3];
    char name[64];
    std::snprintf(name, sizeof name, "gen_%02zu_%s", i, to_string(shape).c_str());
    out.push_back({std::string(name) + ".tdp", shape, gen.generate(name, shape)});
  }
  return out;
}

std::vector<std::filesystem::path>
write_corpus(const std::vector<GeneratedProgram> &corpus,
             const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (const auto &g : corpus) {
    auto p = dir / g.file_name;
    std::ofstream f(p, std::ios::binary);
    if (!f)
      throw std::runtime_error("cannot write " + p.string());
    f << g.source;
    paths.push_back(p);
  }
  return paths;
}

} // namespace tdp
