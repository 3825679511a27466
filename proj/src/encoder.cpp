#include "res/encoder.hpp"

#include <cmath>

namespace res {

void EncoderConfig::validate() const {
    require(hidden > 0 && layers > 0 && heads > 0, "encoder config: sizes must be positive");
    require(hidden % heads == 0, "encoder config: hidden must be divisible by heads");
    require(max_positions > 0, "encoder config: max_positions must be positive");
    require(prefix_len >= 1, "encoder config: prefix_len must be >= 1");
    require(max_segment_len >= 8, "encoder config: max_segment_len too small");
    require(vocab_size > 0, "encoder config: vocab_size unset");
    require(0.0 <= dropout && dropout < 1.0, "encoder config: dropout out of range");
    require(ln_eps > 0, "encoder config: ln_eps must be positive");
    require(max_positions >= max_segment_len + prefix_len,
            "encoder config: max_positions must cover a full entity-read input");
}

Encoder::Encoder(EncoderConfig cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    const int d = cfg_.hidden;
    const real s = 0.02;
    auto randn = [&](int r, int c) { return Matrix::randn(r, c, rng, s); };
    auto ones_row = [&](int c) {
        Matrix m(1, c);
        m.fill(1.0);
        return m;
    };
    add_param("tok_emb", randn(cfg_.vocab_size, d));
    add_param("pos_emb", randn(cfg_.max_positions, d));
    for (int l = 0; l < cfg_.layers; ++l) {
        const std::string p = "L" + std::to_string(l) + ".";
        add_param(p + "ln1.g", ones_row(d));
        add_param(p + "ln1.b", Matrix::zeros(1, d));
        add_param(p + "attn.wq", randn(d, d));
        add_param(p + "attn.bq", Matrix::zeros(1, d));
        add_param(p + "attn.wk", randn(d, d));
        add_param(p + "attn.bk", Matrix::zeros(1, d));
        add_param(p + "attn.wv", randn(d, d));
        add_param(p + "attn.bv", Matrix::zeros(1, d));
        add_param(p + "attn.wo", randn(d, d));
        add_param(p + "attn.bo", Matrix::zeros(1, d));
        add_param(p + "ln2.g", ones_row(d));
        add_param(p + "ln2.b", Matrix::zeros(1, d));
        add_param(p + "ff.w1", randn(d, 4 * d));
        add_param(p + "ff.b1", Matrix::zeros(1, 4 * d));
        add_param(p + "ff.w2", randn(4 * d, d));
        add_param(p + "ff.b2", Matrix::zeros(1, d));
    }
    add_param("final_ln.g", ones_row(d));
    add_param("final_ln.b", Matrix::zeros(1, d));
}

ag::Var Encoder::add_param(const std::string& name, Matrix m) {
    ag::Var v = ag::param(std::move(m));
    by_name_[name] = params_.size();
    params_.emplace_back(name, v);
    return v;
}

ag::Var Encoder::param(const std::string& name) const {
    auto it = by_name_.find(name);
    require(it != by_name_.end(), "encoder: unknown parameter " + name);
    return params_[it->second].second;
}

std::vector<ag::Var> Encoder::parameter_vars() const {
    std::vector<ag::Var> out;
    out.reserve(params_.size());
    for (const auto& [name, v] : params_) out.push_back(v);
    return out;
}

ag::Var Encoder::blocks(ag::Var h, bool training, Rng& dropout_rng) {
    const int dh = cfg_.head_dim();
    const real inv_sqrt_dh = 1.0 / std::sqrt(static_cast<real>(dh));
    for (int l = 0; l < cfg_.layers; ++l) {
        const std::string p = "L" + std::to_string(l) + ".";
        ag::Var x = ag::layer_norm(h, param(p + "ln1.g"), param(p + "ln1.b"), cfg_.ln_eps);
        ag::Var q = ag::add_rowvec(ag::matmul(x, param(p + "attn.wq")), param(p + "attn.bq"));
        ag::Var k = ag::add_rowvec(ag::matmul(x, param(p + "attn.wk")), param(p + "attn.bk"));
        ag::Var v = ag::add_rowvec(ag::matmul(x, param(p + "attn.wv")), param(p + "attn.bv"));
        std::vector<ag::Var> heads;
        heads.reserve(static_cast<std::size_t>(cfg_.heads));
        for (int a = 0; a < cfg_.heads; ++a) {
            ag::Var qa = ag::slice_cols(q, a * dh, (a + 1) * dh);
            ag::Var ka = ag::slice_cols(k, a * dh, (a + 1) * dh);
            ag::Var va = ag::slice_cols(v, a * dh, (a + 1) * dh);
            ag::Var scores = ag::scale(ag::matmul(qa, ka, false, true), inv_sqrt_dh);
            heads.push_back(ag::matmul(ag::softmax_rows(scores), va));
        }
        ag::Var o = ag::add_rowvec(ag::matmul(ag::concat_cols(heads), param(p + "attn.wo")),
                                   param(p + "attn.bo"));
        o = ag::dropout(o, cfg_.dropout, dropout_rng, training);
        h = ag::add(h, o);
        ag::Var x2 = ag::layer_norm(h, param(p + "ln2.g"), param(p + "ln2.b"), cfg_.ln_eps);
        ag::Var f = ag::add_rowvec(ag::matmul(x2, param(p + "ff.w1")), param(p + "ff.b1"));
        f = ag::gelu(f);
        f = ag::add_rowvec(ag::matmul(f, param(p + "ff.w2")), param(p + "ff.b2"));
        f = ag::dropout(f, cfg_.dropout, dropout_rng, training);
        h = ag::add(h, f);
    }
    return ag::layer_norm(h, param("final_ln.g"), param("final_ln.b"), cfg_.ln_eps);
}

ag::Var Encoder::encode_tokens(const std::vector<int>& ids, bool training, Rng& dropout_rng) {
    require(!ids.empty(), "encode_tokens: empty input");
    require(static_cast<int>(ids.size()) <= cfg_.max_positions,
            "encode_tokens: input longer than max_positions; truncate first");
    for (int id : ids)
        require(0 <= id && id < cfg_.vocab_size, "encode_tokens: token id out of range");
    std::vector<int> positions(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);
    ag::Var h = ag::add(ag::gather_rows(param("tok_emb"), ids),
                        ag::gather_rows(param("pos_emb"), positions));
    h = ag::dropout(h, cfg_.dropout, dropout_rng, training);
    return blocks(h, training, dropout_rng);
}

ag::Var Encoder::encode_embeddings(const ag::Var& x, const std::vector<int>& positions,
                                   bool training, Rng& dropout_rng) {
    require(x != nullptr && x->val.rows > 0, "encode_embeddings: empty input");
    require(x->val.cols == cfg_.hidden, "encode_embeddings: width mismatch");
    require(positions.size() == static_cast<std::size_t>(x->val.rows),
            "encode_embeddings: one position id per row required");
    require(x->val.rows <= cfg_.max_positions,
            "encode_embeddings: input longer than max_positions");
    for (int p : positions)
        require(0 <= p && p < cfg_.max_positions, "encode_embeddings: position id out of range");
    ag::Var h = ag::add(x, ag::gather_rows(param("pos_emb"), positions));
    h = ag::dropout(h, cfg_.dropout, dropout_rng, training);
    return blocks(h, training, dropout_rng);
}

}  // namespace res
