"""Package-wide constants."""

# Relative neighbour encoding layout: offset(3) centroid(3) offset norm(1) L(1)
ENCODING_CHANNELS = 8
OFFSET_CHANNELS = slice(0, 3)
CENTROID_CHANNELS = slice(3, 6)
OFFSET_NORM_CHANNEL = 6
DISTRIBUTION_CHANNEL = 7

# Strict ladder
STRICT_STAGES = 5
STRICT_TOTAL_RATIO = 512
STRICT_BOTTLENECK_WIDTH = 512
STEM_WIDTH = 8

# Checkpoint container
CHECKPOINT_MAGIC = b"PGCK"
CHECKPOINT_VERSION = 1

# Output file names
TRAINING_LOG_NAME = "training_log.csv"
RESOLVED_CONFIG_NAME = "config.resolved.yaml"
RUN_LOG_NAME = "run.log.jsonl"
EVAL_RECORDS_NAME = "eval_records.jsonl"
MANIFEST_NAME = "manifest.csv"
CHECKPOINT_DIR = "checkpoints"
LAST_CHECKPOINT = "last.pgck"
BEST_CHECKPOINT = "best.pgck"
