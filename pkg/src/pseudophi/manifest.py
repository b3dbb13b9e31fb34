"""Training hyperparameters for the downstream masked-LM and de-identification runs.

Model training happens elsewhere; this only records the settings so that
runs on the generated corpora are configured consistently.
"""

PRETRAIN = {
    "lr": 2e-5,
    "max_seq_len": 1024,
    "epochs": 6,
}

FINETUNE = {
    "lr": 7e-6,
    "dropout": 0.1,
    "epochs": 20,
    "selection": "lowest validation loss",
    "validation_fraction": 0.2,
}


def training_manifest() -> dict:
    return {"pretrain": dict(PRETRAIN), "finetune": dict(FINETUNE)}
