#include "tdp/solve.hpp"

#include <algorithm>

namespace tdp {

std::string QueryCache::canonical_key(const PathCondition &pc) {
  std::vector<std::string> parts;
  parts.reserve(pc.size());
  for (const auto &c : pc.constraints())
    parts.push_back(to_string(c));
  std::sort(parts.begin(), parts.end());
  parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
  std::string key;
  for (const auto &p : parts) {
    key += p;
    key += ';';
  }
  return key;
}

const CachedAnswer *QueryCache::lookup(const std::string &key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    ++misses_;
    return nullptr;
  }
  ++hits_;
  return &it->second;
}

void QueryCache::insert(std::string key, CachedAnswer answer) {
  entries_.insert_or_assign(std::move(key), std::move(answer));
}

QueryResult cache_query(QueryCache &cache, const PathCondition &pc,
                        std::span<const SymDecl> decls,
                        std::uint64_t domain_cap) {
  std::string key = QueryCache::canonical_key(pc);
  if (const CachedAnswer *hit = cache.lookup(key))
    return {*hit, true};
  QueryResult r;
  if (auto m = solve(pc, decls, domain_cap)) {
    r.answer.verdict = Verdict::Sat;
    r.answer.model = std::move(*m);
  }
  cache.insert(std::move(key), r.answer);
  return r;
}

} // namespace tdp
