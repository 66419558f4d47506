
version = "2026-10-17"
