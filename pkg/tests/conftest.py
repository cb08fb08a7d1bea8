import hypothesis

# Search-heavy properties need generous deadlines; derandomize keeps the
# suite reproducible run to run.
hypothesis.settings.register_profile(
    "suite", deadline=None, max_examples=60, derandomize=True
)
hypothesis.settings.load_profile("suite")
