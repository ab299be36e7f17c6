#pragma once

#include <string>
#include <vector>

namespace sqlink {

struct ExamplePair {
    std::string question;
    std::string sql;

    friend bool operator==(const ExamplePair&, const ExamplePair&) = default;
};

struct VectorizerConfig {
    int dim = 1024;  // hashed character-trigram TF, L2-normalized
};

std::vector<double> vectorize_question(const std::string& question, const VectorizerConfig& config = {});

/// Demonstration selector: nearest training questions by Euclidean distance
/// over deterministic trigram vectors. Immutable after build.
class ExampleIndex {
public:
    struct Entry {
        ExamplePair pair;
        std::vector<double> vector;
    };

    static ExampleIndex build(const std::vector<ExamplePair>& training_pairs,
                              const VectorizerConfig& config = {});

    /// k nearest entries, ascending distance, ties broken by training order.
    std::vector<ExamplePair> select_top_k(const std::string& question, int k) const;
    std::vector<std::pair<ExamplePair, double>> select_top_k_with_distance(const std::string& question,
                                                                           int k) const;

    std::size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }
    const std::string& vectorizer_id() const { return vectorizer_id_; }

private:
    std::vector<Entry> entries_;
    VectorizerConfig config_;
    std::string vectorizer_id_;
};

}  // namespace sqlink
