# Environment settings and experiment configuration
