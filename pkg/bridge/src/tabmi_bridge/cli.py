import click

from .corpus import build_corpus, load_schema_features, read_rows
from .model import BridgeConfig, save_bridge, train_bridge


@click.group()
def main():
    """Causal-LM scoring bridge: train on a table, serve logits over HTTP."""


@main.command()
@click.option("--data", required=True, help="training CSV")
@click.option("--schema", required=True, help="schema JSON")
@click.option("--out", required=True, help="output model directory")
@click.option("--epochs", default=30, show_default=True)
@click.option("--lr", default=3e-3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--n-embd", default=64, show_default=True)
@click.option("--n-layer", default=2, show_default=True)
@click.option("--length-normalize", is_flag=True,
              help="average value-token log-probs instead of summing")
def train(data, schema, out, epochs, lr, seed, n_embd, n_layer,
          length_normalize):
    """Fit the LM on textualized rows with value-only loss."""
    features = load_schema_features(schema)
    rows = read_rows(data)
    corpus = build_corpus(rows, features, seed=seed)
    config = BridgeConfig(epochs=epochs, lr=lr, seed=seed, n_embd=n_embd,
                          n_layer=n_layer, length_normalize=length_normalize)
    model = train_bridge(corpus, config)
    save_bridge(model, corpus.vocab, config, out)
    click.echo(f"trained on {len(rows)} rows "
               f"(vocab {len(corpus.vocab)}, "
               f"masked fraction {corpus.masked_fraction:.3f}); saved to {out}")


@main.command()
@click.option("--model", "model_dir", required=True, help="model directory")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True)
@click.option("--max-in-flight", default=4, show_default=True)
def serve(model_dir, host, port, max_in_flight):
    """Serve the scoring protocol."""
    import uvicorn

    from .server import create_app

    app = create_app(model_dir, max_in_flight=max_in_flight)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
