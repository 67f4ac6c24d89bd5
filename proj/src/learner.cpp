#include "psb/learner.hpp"

#include "psb/numeric.hpp"
#include "psb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace psb {

namespace {

struct Forward {
    Matrix hidden;   // post-ReLU activations, hidden_dim x batch
    Matrix probs;    // n_classes x batch
};

Forward forward_batch(const LearnerState& state, const Matrix& inputs) {
    Forward f;
    f.hidden = relu((state.w1 * inputs).colwise() + state.b1);
    f.probs = softmax_columns((state.w2 * f.hidden).colwise() + state.b2);
    return f;
}

Matrix batch_matrix(const std::vector<TrainExample>& batch, Eigen::Index dim) {
    Matrix x(dim, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].features.size() != dim)
            throw DataError("learner: feature dimension mismatch");
        x.col(static_cast<Eigen::Index>(i)) = batch[i].features;
    }
    return x;
}

double mean_cross_entropy(const Matrix& probs, const std::vector<TrainExample>& batch) {
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double p = probs(batch[i].label, static_cast<Eigen::Index>(i));
        loss -= std::log(std::max(p, 1e-300));
    }
    return loss / static_cast<double>(batch.size());
}

int argmax_class(const Vector& probs) {
    // Fixed tie rule: the lower class index wins.
    return probs[1] > probs[0] ? 1 : 0;
}

}  // namespace

LearnerState init_learner(Eigen::Index feature_dim, Eigen::Index hidden_dim, std::uint64_t seed) {
    if (feature_dim < 1 || hidden_dim < 1)
        throw ConfigError("init_learner: dimensions must be positive");

    LearnerState s;
    s.feature_dim = feature_dim;
    s.hidden_dim = hidden_dim;
    s.rng_seed = seed;

    auto rng = make_rng(derive_seed(seed, 0x1417));
    auto normal_matrix = [&rng](Eigen::Index rows, Eigen::Index cols) {
        std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = gauss(rng);
        return m;
    };
    s.w1 = normal_matrix(hidden_dim, feature_dim);
    s.b1 = Vector::Zero(hidden_dim);
    s.w2 = normal_matrix(kNumClasses, hidden_dim);
    s.b2 = Vector::Zero(kNumClasses);
    s.v_w1 = Matrix::Zero(hidden_dim, feature_dim);
    s.v_b1 = Vector::Zero(hidden_dim);
    s.v_w2 = Matrix::Zero(kNumClasses, hidden_dim);
    s.v_b2 = Vector::Zero(kNumClasses);
    return s;
}

Vector predict_proba(const LearnerState& state, const Vector& features) {
    if (features.size() != state.feature_dim)
        throw DataError("predict_proba: feature dimension mismatch");
    const Vector hidden = relu(state.w1 * features + state.b1);
    return softmax(state.w2 * hidden + state.b2);
}

Vector augment(const Vector& features, const AugmentConfig& config, AugmentMode mode,
               std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sigma =
        mode == AugmentMode::Weak ? config.weak_noise_sigma : config.strong_noise_sigma;
    Vector out(features.size());
    for (Eigen::Index i = 0; i < features.size(); ++i) out[i] = features[i] + sigma * gauss(rng);
    if (mode == AugmentMode::Strong && config.strong_mask_prob > 0.0) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (Eigen::Index i = 0; i < out.size(); ++i)
            if (unit(rng) < config.strong_mask_prob) out[i] = 0.0;
    }
    return out;
}

double batch_loss(const LearnerState& state, const std::vector<TrainExample>& batch) {
    if (batch.empty()) throw DataError("batch_loss: empty batch");
    const Matrix x = batch_matrix(batch, state.feature_dim);
    return mean_cross_entropy(forward_batch(state, x).probs, batch);
}

Gradients batch_gradients(const LearnerState& state, const std::vector<TrainExample>& batch) {
    if (batch.empty()) throw DataError("batch_gradients: empty batch");
    const Matrix x = batch_matrix(batch, state.feature_dim);
    const Forward f = forward_batch(state, x);
    const Eigen::Index n = static_cast<Eigen::Index>(batch.size());

    Matrix dlogits = f.probs;   // p - onehot(y), averaged over the batch
    for (Eigen::Index i = 0; i < n; ++i) dlogits(batch[static_cast<std::size_t>(i)].label, i) -= 1.0;
    dlogits /= static_cast<double>(n);

    Gradients g;
    g.w2 = dlogits * f.hidden.transpose();
    g.b2 = dlogits.rowwise().sum();
    Matrix dhidden = (state.w2.transpose() * dlogits).cwiseProduct(
        (f.hidden.array() > 0.0).cast<double>().matrix());
    g.w1 = dhidden * x.transpose();
    g.b1 = dhidden.rowwise().sum();
    return g;
}

TrainResult train(const LearnerState& state, const std::vector<TrainExample>& labeled,
                  const std::vector<TrainExample>& validation, const TrainConfig& config,
                  const AugmentConfig& aug, std::uint64_t seed) {
    if (labeled.empty()) throw DataError("train: empty labeled set");
    if (config.patience > 0 && validation.empty())
        throw DataError("train: early stopping needs a validation set");
    if (config.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (config.epochs_per_iteration < 0) throw ConfigError("train: negative epoch count");

    TrainResult result;
    result.state = state;

    LearnerState current = state;
    EarlyStopper stopper(config.patience);
    std::vector<std::size_t> order(labeled.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= config.epochs_per_iteration; ++epoch) {
        auto epoch_rng = make_rng(derive_seed(seed, 0xE000u + static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), epoch_rng);

        double loss_sum = 0.0;
        long batches = 0;
        std::vector<TrainExample> batch;
        batch.reserve(static_cast<std::size_t>(config.batch_size));
        for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(config.batch_size)) {
            batch.clear();
            const std::size_t end =
                std::min(order.size(), pos + static_cast<std::size_t>(config.batch_size));
            for (std::size_t j = pos; j < end; ++j) {
                const TrainExample& ex = labeled[order[j]];
                if (ex.strong_augment) {
                    TrainExample perturbed = ex;
                    perturbed.features =
                        augment(ex.features, aug, AugmentMode::Strong,
                                derive_seed(seed, (static_cast<std::uint64_t>(epoch) << 32) ^
                                                      static_cast<std::uint64_t>(order[j])));
                    batch.push_back(std::move(perturbed));
                } else {
                    batch.push_back(ex);
                }
            }

            const Matrix x = batch_matrix(batch, current.feature_dim);
            const Forward f = forward_batch(current, x);
            const double loss = mean_cross_entropy(f.probs, batch);
            if (!std::isfinite(loss))
                throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch));
            loss_sum += loss;
            ++batches;

            Matrix dlogits = f.probs;
            for (std::size_t j = 0; j < batch.size(); ++j)
                dlogits(batch[j].label, static_cast<Eigen::Index>(j)) -= 1.0;
            dlogits /= static_cast<double>(batch.size());

            // PyTorch-style momentum: v = mu*v + g; theta -= lr*v.
            const Matrix g_w2 = dlogits * f.hidden.transpose();
            const Vector g_b2 = dlogits.rowwise().sum();
            const Matrix dhidden = (current.w2.transpose() * dlogits)
                                       .cwiseProduct((f.hidden.array() > 0.0).cast<double>().matrix());
            const Matrix g_w1 = dhidden * x.transpose();
            const Vector g_b1 = dhidden.rowwise().sum();

            current.v_w1 = config.momentum * current.v_w1 + g_w1;
            current.v_b1 = config.momentum * current.v_b1 + g_b1;
            current.v_w2 = config.momentum * current.v_w2 + g_w2;
            current.v_b2 = config.momentum * current.v_b2 + g_b2;
            current.w1 -= config.learning_rate * current.v_w1;
            current.b1 -= config.learning_rate * current.v_b1;
            current.w2 -= config.learning_rate * current.v_w2;
            current.b2 -= config.learning_rate * current.v_b2;
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = loss_sum / static_cast<double>(std::max<long>(batches, 1));
        log.val_accuracy = validation.empty() ? std::nan("") : accuracy_on(current, validation);
        result.log.push_back(log);

        if (!validation.empty()) {
            const bool improved_to_best = log.val_accuracy > stopper.best_accuracy();
            const bool stop = stopper.feed(log.val_accuracy);
            if (improved_to_best) result.state = current;
            result.best_epoch = stopper.best_epoch();
            if (stop) return result;
        } else {
            result.state = current;
            result.best_epoch = epoch;
        }
    }
    return result;
}

double accuracy_on(const LearnerState& state, const std::vector<TrainExample>& examples) {
    if (examples.empty()) throw DataError("accuracy_on: empty example set");
    long correct = 0;
    for (const TrainExample& ex : examples)
        if (argmax_class(predict_proba(state, ex.features)) == ex.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

std::vector<PredictionRecord> evaluate(const LearnerState& state,
                                       const std::vector<Sample>& samples) {
    std::vector<PredictionRecord> records;
    records.reserve(samples.size());
    for (const Sample& s : samples) {
        if (!s.label) throw DataError("evaluate: unlabeled sample '" + s.id + "'");
        const Vector probs = predict_proba(state, s.features);
        PredictionRecord r;
        r.sample_id = s.id;
        r.true_class = *s.label;
        r.predicted_class = argmax_class(probs);
        r.confidence = probs[r.predicted_class];
        r.group = s.group;
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<TrainExample> to_examples(const std::vector<Sample>& samples) {
    std::vector<TrainExample> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) {
        if (!s.label) throw DataError("to_examples: unlabeled sample '" + s.id + "'");
        out.push_back(TrainExample{s.features, *s.label, false});
    }
    return out;
}

}  // namespace psb
