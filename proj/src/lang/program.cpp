#include "tdp/lang.hpp"

#include <algorithm>
#include <set>

namespace tdp {

std::uint64_t SymDecl::size() const {
  if (lo > hi)
    return 0;
  return static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
}

std::optional<std::uint32_t> Program::slot_of(std::string_view var) const {
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i] == var)
      return static_cast<std::uint32_t>(i);
  return std::nullopt;
}

namespace {

bool terminators_equal(const Terminator &a, const Terminator &b) {
  if (a.kind != b.kind)
    return false;
  switch (a.kind) {
  case TermKind::None:
    return true;
  case TermKind::Branch:
    return a.branch.if_true == b.branch.if_true &&
           a.branch.if_false == b.branch.if_false &&
           structurally_equal(a.branch.cond, b.branch.cond);
  case TermKind::Jump:
    return a.jump.target == b.jump.target;
  case TermKind::Exit:
    return a.exit.code == b.exit.code;
  case TermKind::Error:
    return a.error.label == b.error.label;
  }
  return false;
}

std::vector<BlockId> successors(const BasicBlock &b) {
  switch (b.term.kind) {
  case TermKind::Branch:
    return {b.term.branch.if_true, b.term.branch.if_false};
  case TermKind::Jump:
    return {b.term.jump.target};
  default:
    return {};
  }
}

void check_expr(const Program &p, const Expr &e, const std::string &where,
                std::vector<std::string> &diags) {
  std::vector<std::uint32_t> used;
  collect_slots(e, used);
  for (auto s : used)
    if (s >= p.slots.size())
      diags.push_back(where + ": variable slot " + std::to_string(s) +
                      " out of range");
}

} // namespace

bool structurally_equal(const Program &a, const Program &b) {
  if (a.name != b.name || a.inputs != b.inputs || a.slots != b.slots ||
      a.entry != b.entry || a.blocks.size() != b.blocks.size())
    return false;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    const auto &x = a.blocks[i];
    const auto &y = b.blocks[i];
    if (x.name != y.name || x.instrs.size() != y.instrs.size() ||
        !terminators_equal(x.term, y.term))
      return false;
    for (std::size_t j = 0; j < x.instrs.size(); ++j)
      if (x.instrs[j].slot != y.instrs[j].slot ||
          !structurally_equal(x.instrs[j].value, y.instrs[j].value))
        return false;
  }
  return true;
}

std::vector<std::string> validate(const Program &p, const ParseOptions &opts) {
  std::vector<std::string> diags;

  if (p.name.empty())
    diags.push_back("program has no name");

  std::set<std::string> seen;
  for (const auto &d : p.inputs) {
    if (!seen.insert(d.name).second)
      diags.push_back("duplicate input '" + d.name + "'");
    if (d.lo > d.hi)
      diags.push_back("empty domain for '" + d.name + "'");
    else if (d.size() > opts.domain_cap)
      diags.push_back("domain of '" + d.name + "' exceeds cap " +
                      std::to_string(opts.domain_cap));
  }
  if (p.slots.size() < p.inputs.size())
    diags.push_back("slot table shorter than input list");
  else
    for (std::size_t i = 0; i < p.inputs.size(); ++i)
      if (p.slots[i] != p.inputs[i].name)
        diags.push_back("slot " + std::to_string(i) + " is not input '" +
                        p.inputs[i].name + "'");

  if (p.blocks.empty()) {
    diags.push_back("program has no blocks");
    return diags;
  }
  if (p.entry >= p.blocks.size())
    diags.push_back("entry block out of range");

  bool structure_ok = diags.empty();
  for (const auto &b : p.blocks) {
    if (b.term.kind == TermKind::None) {
      diags.push_back("block '" + b.name + "' has no terminator");
      structure_ok = false;
    }
    for (auto t : successors(b))
      if (t >= p.blocks.size()) {
        diags.push_back("block '" + b.name + "' targets undefined block " +
                        std::to_string(t));
        structure_ok = false;
      }
    for (const auto &a : b.instrs) {
      if (a.slot >= p.slots.size()) {
        diags.push_back("block '" + b.name + "' assigns unknown slot");
        structure_ok = false;
      } else if (!a.value) {
        diags.push_back("block '" + b.name + "' has an empty assignment");
        structure_ok = false;
      } else {
        check_expr(p, *a.value, "block '" + b.name + "'", diags);
      }
    }
    if (b.term.kind == TermKind::Branch) {
      if (!b.term.branch.cond) {
        diags.push_back("block '" + b.name + "' has an empty condition");
        structure_ok = false;
      } else {
        check_expr(p, *b.term.branch.cond, "block '" + b.name + "'", diags);
      }
    }
  }
  if (!structure_ok || !diags.empty())
    return diags;

  // Definite assignment: forward must-analysis over the block graph.
  const std::size_t nslots = p.slots.size();
  const std::size_t nblocks = p.blocks.size();
  std::vector<bool> reachable(nblocks, false);
  std::vector<BlockId> work{p.entry};
  reachable[p.entry] = true;
  while (!work.empty()) {
    BlockId b = work.back();
    work.pop_back();
    for (auto s : successors(p.blocks[b]))
      if (!reachable[s]) {
        reachable[s] = true;
        work.push_back(s);
      }
  }

  std::vector<std::vector<bool>> in(nblocks, std::vector<bool>(nslots, true));
  std::vector<bool> inputs_only(nslots, false);
  for (std::size_t i = 0; i < p.inputs.size(); ++i)
    inputs_only[i] = true;
  in[p.entry] = inputs_only;

  auto transfer = [&](BlockId b) {
    auto out = in[b];
    for (const auto &a : p.blocks[b].instrs)
      out[a.slot] = true;
    return out;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::vector<bool>> next(nblocks,
                                        std::vector<bool>(nslots, true));
    next[p.entry] = inputs_only;
    for (BlockId b = 0; b < nblocks; ++b) {
      if (!reachable[b])
        continue;
      auto out = transfer(b);
      for (auto s : successors(p.blocks[b]))
        for (std::size_t v = 0; v < nslots; ++v)
          next[s][v] = next[s][v] && out[v];
    }
    for (BlockId b = 0; b < nblocks; ++b)
      if (reachable[b] && next[b] != in[b]) {
        in[b] = next[b];
        changed = true;
      }
  }

  std::set<std::string> reported;
  auto check_reads = [&](const Expr &e, const std::vector<bool> &defined) {
    std::vector<std::uint32_t> used;
    collect_slots(e, used);
    for (auto s : used)
      if (!defined[s] && reported.insert(p.slots[s]).second)
        diags.push_back(p.slots[s] + " possibly unassigned");
  };
  for (BlockId b = 0; b < nblocks; ++b) {
    if (!reachable[b])
      continue;
    auto defined = in[b];
    for (const auto &a : p.blocks[b].instrs) {
      check_reads(*a.value, defined);
      defined[a.slot] = true;
    }
    if (p.blocks[b].term.kind == TermKind::Branch)
      check_reads(*p.blocks[b].term.branch.cond, defined);
  }
  return diags;
}

std::string print_program(const Program &p) {
  std::string out = "program " + p.name + ";\n";
  for (const auto &d : p.inputs)
    out += "sym " + d.name + " in [" + std::to_string(d.lo) + ", " +
           std::to_string(d.hi) + "];\n";
  if (p.slots.size() > p.inputs.size()) {
    out += "local ";
    for (std::size_t i = p.inputs.size(); i < p.slots.size(); ++i) {
      if (i != p.inputs.size())
        out += ", ";
      out += p.slots[i];
    }
    out += ";\n";
  }
  // Block form takes the first block as the entry.
  for (const auto &b : p.blocks) {
    out += "block " + b.name + " {\n";
    for (const auto &a : b.instrs)
      out += "  " + p.slots[a.slot] + " = " + to_string(*a.value) + ";\n";
    const auto &t = b.term;
    switch (t.kind) {
    case TermKind::Branch: {
      std::string cond = to_string(*t.branch.cond);
      if (t.branch.cond->kind() != ExprKind::Binary)
        cond = "(" + cond + ")";
      out += "  br " + cond + " " + p.blocks[t.branch.if_true].name + ", " +
             p.blocks[t.branch.if_false].name + ";\n";
      break;
    }
    case TermKind::Jump:
      out += "  jump " + p.blocks[t.jump.target].name + ";\n";
      break;
    case TermKind::Exit:
      out += "  exit(" + std::to_string(t.exit.code) + ");\n";
      break;
    case TermKind::Error: {
      std::string label;
      for (char c : t.error.label) {
        if (c == '"' || c == '\\')
          label += '\\';
        label += c;
      }
      out += "  error(\"" + label + "\");\n";
      break;
    }
    case TermKind::None:
      break;
    }
    out += "}\n";
  }
  return out;
}

} // namespace tdp
