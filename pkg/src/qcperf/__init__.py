"""Architecture-aware performance and resource estimation for fault-tolerant quantum computing."""
