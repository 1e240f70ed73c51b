"""PPO learner: policy network, update rule, training loop and checkpoints."""

from src.learner.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from src.learner.network import NetworkSpec, PolicyNetwork, Upstream, backward, forward
from src.learner.ppo import Adam, RolloutBuffer, gae, mean_action, ppo_update, sample_action
from src.learner.toy import ToyVelocityEnv, toy_ppo_config
from src.learner.trainer import TrainingResult, train

__all__ = [
    'Adam',
    'Checkpoint',
    'NetworkSpec',
    'PolicyNetwork',
    'RolloutBuffer',
    'ToyVelocityEnv',
    'TrainingResult',
    'Upstream',
    'backward',
    'forward',
    'gae',
    'load_checkpoint',
    'mean_action',
    'ppo_update',
    'sample_action',
    'save_checkpoint',
    'toy_ppo_config',
    'train',
]
