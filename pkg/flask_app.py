"""
cutofflab

Certified total variation bounds for powers of positive definite
functions on free groups, Coxeter groups and their free products

Serves the batch analyses behind a JSON API; the same configs run from
the command line through cli.py
"""

from flask import Flask
from config import init_app, load_settings
from routes.api import api_bp


app = Flask(__name__)


# Store the settings and set up logging
settings = load_settings()
init_app(app, settings)


# Register the blueprints
app.register_blueprint(api_bp)


if __name__ == "__main__":
    app.run(settings.host, debug=settings.debug)
