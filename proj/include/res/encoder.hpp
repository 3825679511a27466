#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "res/autograd.hpp"
#include "res/common.hpp"

namespace res {

struct EncoderConfig {
    int hidden = 128;
    int layers = 4;
    int heads = 4;
    int max_positions = 512;
    int prefix_len = 3;
    int max_segment_len = 64;
    int vocab_size = 0;
    real dropout = 0.1;
    real ln_eps = 1e-5;

    void validate() const;
    int head_dim() const { return hidden / heads; }
};

// Pre-LN transformer. One parameter set serves two entry points:
// encode_tokens (ids, sequential positions) for the reading pass and
// encode_embeddings (continuous rows, caller-chosen positions) for the
// selecting pass. Position embeddings and dropout are applied at the input
// of both. Output is the last layer after a final layer norm, one row per
// input position.
class Encoder {
  public:
    Encoder() = default;
    Encoder(EncoderConfig cfg, Rng& rng);

    const EncoderConfig& config() const { return cfg_; }

    ag::Var encode_tokens(const std::vector<int>& ids, bool training, Rng& dropout_rng);
    ag::Var encode_embeddings(const ag::Var& x, const std::vector<int>& positions, bool training,
                              Rng& dropout_rng);

    const std::vector<std::pair<std::string, ag::Var>>& parameters() const { return params_; }
    ag::Var param(const std::string& name) const;
    std::vector<ag::Var> parameter_vars() const;

  private:
    ag::Var add_param(const std::string& name, Matrix m);
    ag::Var blocks(ag::Var h, bool training, Rng& dropout_rng);

    EncoderConfig cfg_;
    std::vector<std::pair<std::string, ag::Var>> params_;
    std::unordered_map<std::string, std::size_t> by_name_;
};

}  // namespace res
