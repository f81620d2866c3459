"""Neural methods for complex data: MLP model selection, HMM/MLP regime
switching, and self-organizing maps for vectors, dissimilarities, kernels,
categorical tables and two-scale time series."""

from .errors import DivergedTrainingError, InputError, NonPositiveKernelError, NumericError
from .mlp import (FunctionalNeuron, MlpParams, TrainConfig, TrainingPair, backprop_gradient,
                  embed_autoregressive, functional_neuron_forward, mlp_forward, mse_loss, train_mlp)
from .selection import PenaltySpec, SelectionTrace, bic_score, penalty_value, select_hidden_units
from .hmm_mlp import (GemConfig, HmmMlpParams, forward_log_likelihood, gem_fit, simulate,
                      viterbi_decode)
from .som import (MapLattice, NeighborhoodSchedule, assign, batch_som_train, derivative_preprocess,
                  map_quality, neighborhood_weight, segment_project_prototype)
from .metrics import (edit_distance, gram_matrix, heat_kernel_matrix, kernel_distance, poly_kernel,
                      rbf_kernel, validate_dissimilarity)
from .som_variants import kernel_som_train, local_distortion, median_som_train, q_median_som_train
from .categorical import (CategoricalTable, burt_table, ca_transform, categorical_som_train,
                          disjunctive_table)
from .forecast import (TwoScaleSeries, decompose_profiles, forecast_mean_var, forecast_next_vector,
                       predict_profile, train_profile_som)

__version__ = "0.1.0"
