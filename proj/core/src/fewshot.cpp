#include "sqlink/fewshot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>

#include "sqlink/errors.hpp"

namespace sqlink {

namespace {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string normalize_question(const std::string& question) {
    std::string out;
    out.reserve(question.size());
    bool in_space = false;
    for (char c : question) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space && !out.empty()) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

}  // namespace

std::vector<double> vectorize_question(const std::string& question, const VectorizerConfig& config) {
    std::vector<double> vec(static_cast<std::size_t>(config.dim), 0.0);
    std::string text = normalize_question(question);
    if (text.empty()) return vec;  // zero vector for empty questions

    if (text.size() < 3) {
        vec[fnv1a64(text) % vec.size()] += 1.0;
    } else {
        for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
            vec[fnv1a64(std::string_view(text).substr(i, 3)) % vec.size()] += 1.0;
        }
    }
    double norm = 0.0;
    for (double v : vec) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (double& v : vec) v /= norm;
    }
    return vec;
}

ExampleIndex ExampleIndex::build(const std::vector<ExamplePair>& training_pairs,
                                 const VectorizerConfig& config) {
    if (training_pairs.empty()) {
        throw Error(ErrorCode::EmptyTrainingSet, "cannot build an index from zero pairs");
    }
    ExampleIndex index;
    index.config_ = config;
    index.vectorizer_id_ = "trigram-fnv1a-l2-d" + std::to_string(config.dim);
    index.entries_.reserve(training_pairs.size());
    for (const ExamplePair& pair : training_pairs) {
        index.entries_.push_back({pair, vectorize_question(pair.question, config)});
    }
    return index;
}

std::vector<std::pair<ExamplePair, double>> ExampleIndex::select_top_k_with_distance(
    const std::string& question, int k) const {
    std::vector<double> query = vectorize_question(question, config_);

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        double sum = 0.0;
        const std::vector<double>& v = entries_[i].vector;
        for (std::size_t d = 0; d < v.size(); ++d) {
            double diff = v[d] - query[d];
            sum += diff * diff;
        }
        scored.emplace_back(std::sqrt(sum), i);
    }
    // ties broken by training-set order via the index component
    std::stable_sort(scored.begin(), scored.end());

    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), scored.size());
    std::vector<std::pair<ExamplePair, double>> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.emplace_back(entries_[scored[i].second].pair, scored[i].first);
    }
    return out;
}

std::vector<ExamplePair> ExampleIndex::select_top_k(const std::string& question, int k) const {
    std::vector<ExamplePair> out;
    for (auto& [pair, dist] : select_top_k_with_distance(question, k)) {
        out.push_back(std::move(pair));
    }
    return out;
}

}  // namespace sqlink
