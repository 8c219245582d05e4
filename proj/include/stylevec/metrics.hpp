#pragma once

// Text-overlap metrics used by sweeps and evaluation: ROUGE-L (token-level
// LCS, balanced F) and METEOR-lite (exact-match unigram alignment with the
// standard fragmentation penalty; no stemming or synonym stages).

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stylevec/errors.hpp"

namespace stylevec {

enum class MetricId : uint8_t { RougeL = 0, MeteorLite = 1 };

inline const char* to_string(MetricId m) {
    return m == MetricId::RougeL ? "rouge-l" : "meteor-lite";
}

inline MetricId parse_metric(std::string_view s) {
    if (s == "rouge-l") return MetricId::RougeL;
    if (s == "meteor-lite" || s == "meteor") return MetricId::MeteorLite;
    throw UsageError("unknown metric '" + std::string(s) +
                     "' (expected rouge-l|meteor-lite)");
}

struct Score {
    double value = 0.0;
    MetricId metric = MetricId::RougeL;
};

/// Lowercased words split on every non-alphanumeric byte.
inline std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

namespace detail {

inline size_t lcs_length(const std::vector<std::string>& a,
                         const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) cur[j] = prev[j - 1] + 1;
            else cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Exact minimal-chunk alignment search. Among all maximum-cardinality
// unigram matchings it finds the fewest chunks (runs of adjacent candidate
// positions mapped to adjacent reference positions). Branch-and-bound over
// candidate positions; a node cap keeps pathological inputs bounded, falling
// back to the greedy left-to-right alignment beyond it.
class ChunkSearch {
public:
    ChunkSearch(const std::vector<std::string>& cand, const std::vector<std::string>& ref)
        : cand_(cand), ref_(ref), used_(ref.size(), 0) {}

    // (matches, chunks)
    std::pair<size_t, size_t> run() {
        max_matches_ = max_match_count();
        if (max_matches_ == 0) return {0, 0};
        best_chunks_ = greedy_chunks();
        nodes_ = 0;
        std::fill(used_.begin(), used_.end(), 0);
        dfs(0, 0, -2, 0);
        return {max_matches_, best_chunks_};
    }

private:
    size_t max_match_count() const {
        // bipartite matching on token equality decomposes per distinct word
        std::vector<std::string> cs = cand_, rs = ref_;
        std::sort(cs.begin(), cs.end());
        std::sort(rs.begin(), rs.end());
        size_t i = 0, j = 0, m = 0;
        while (i < cs.size() && j < rs.size()) {
            if (cs[i] == rs[j]) { ++m; ++i; ++j; }
            else if (cs[i] < rs[j]) ++i;
            else ++j;
        }
        return m;
    }

    // left-to-right first-fit alignment preferring the continuation slot;
    // always achieves max matches? No — first-fit can block later tokens, so
    // it only seeds the upper bound when it happens to reach max_matches_.
    size_t greedy_chunks() {
        std::fill(used_.begin(), used_.end(), 0);
        size_t matches = 0, chunks = 0;
        int prev_ref = -2;
        bool prev_matched = false;
        for (size_t i = 0; i < cand_.size(); ++i) {
            int pick = -1;
            if (prev_matched && prev_ref + 1 < static_cast<int>(ref_.size()) &&
                !used_[static_cast<size_t>(prev_ref + 1)] &&
                ref_[static_cast<size_t>(prev_ref + 1)] == cand_[i]) {
                pick = prev_ref + 1;
            } else {
                for (size_t j = 0; j < ref_.size(); ++j)
                    if (!used_[j] && ref_[j] == cand_[i]) { pick = static_cast<int>(j); break; }
            }
            if (pick >= 0) {
                used_[static_cast<size_t>(pick)] = 1;
                ++matches;
                if (!(prev_matched && pick == prev_ref + 1)) ++chunks;
                prev_ref = pick;
                prev_matched = true;
            } else {
                prev_matched = false;
            }
        }
        if (matches == max_matches_) return chunks;
        return max_matches_; // safe upper bound: every match its own chunk
    }

    void dfs(size_t i, size_t matches, int prev_ref, size_t chunks) {
        if (chunks >= best_chunks_) return;
        if (nodes_++ > kNodeCap) return;
        if (matches + (cand_.size() - i) < max_matches_) return;
        if (matches == max_matches_) {
            best_chunks_ = std::min(best_chunks_, chunks);
            return;
        }
        // try matching candidate i to each compatible free reference slot;
        // the continuation slot first so good alignments are found early
        const std::string& w = cand_[i];
        auto try_slot = [&](int j) {
            if (j < 0 || j >= static_cast<int>(ref_.size())) return;
            if (used_[static_cast<size_t>(j)] || ref_[static_cast<size_t>(j)] != w) return;
            used_[static_cast<size_t>(j)] = 1;
            const size_t add = (prev_ref >= 0 && j == prev_ref + 1) ? 0 : 1;
            dfs(i + 1, matches + 1, j, chunks + add);
            used_[static_cast<size_t>(j)] = 0;
        };
        if (prev_ref >= 0) try_slot(prev_ref + 1);
        for (int j = 0; j < static_cast<int>(ref_.size()); ++j)
            if (!(prev_ref >= 0 && j == prev_ref + 1)) try_slot(j);
        // or leave candidate i unmatched
        dfs(i + 1, matches, -2, chunks);
    }

    static constexpr size_t kNodeCap = 200'000;
    const std::vector<std::string>& cand_;
    const std::vector<std::string>& ref_;
    std::vector<char> used_;
    size_t max_matches_ = 0;
    size_t best_chunks_ = 0;
    size_t nodes_ = 0;
};

} // namespace detail

/// Token-level longest-common-subsequence F1 (β=1).
inline Score rouge_l(std::string_view candidate, std::string_view reference) {
    const auto c = split_words(candidate);
    const auto r = split_words(reference);
    Score s{0.0, MetricId::RougeL};
    if (c.empty() || r.empty()) return s;
    const size_t lcs = detail::lcs_length(c, r);
    if (lcs == 0) return s;
    const double p = static_cast<double>(lcs) / static_cast<double>(c.size());
    const double rr = static_cast<double>(lcs) / static_cast<double>(r.size());
    s.value = 2.0 * p * rr / (p + rr);
    return s;
}

/// Exact-match METEOR: unigram alignment maximizing matches then minimizing
/// chunks; Fmean = 10PR/(R+9P), penalty = 0.5·(chunks/m)³.
inline Score meteor_lite(std::string_view candidate, std::string_view reference) {
    const auto c = split_words(candidate);
    const auto r = split_words(reference);
    Score s{0.0, MetricId::MeteorLite};
    if (c.empty() || r.empty()) return s;
    detail::ChunkSearch search(c, r);
    const auto [m, chunks] = search.run();
    if (m == 0) return s;
    const double p = static_cast<double>(m) / static_cast<double>(c.size());
    const double rr = static_cast<double>(m) / static_cast<double>(r.size());
    const double fmean = 10.0 * p * rr / (rr + 9.0 * p);
    const double frag = static_cast<double>(chunks) / static_cast<double>(m);
    const double penalty = 0.5 * frag * frag * frag;
    s.value = fmean * (1.0 - penalty);
    return s;
}

inline Score score_text(MetricId metric, std::string_view candidate,
                        std::string_view reference) {
    return metric == MetricId::RougeL ? rouge_l(candidate, reference)
                                      : meteor_lite(candidate, reference);
}

inline double corpus_mean(const std::vector<Score>& scores) {
    if (scores.empty()) throw EmptyInput("no scores to average");
    const MetricId m = scores[0].metric;
    double sum = 0.0;
    for (const auto& s : scores) {
        if (s.metric != m) throw MixedMetrics("scores mix different metrics");
        sum += s.value;
    }
    return sum / static_cast<double>(scores.size());
}

} // namespace stylevec
