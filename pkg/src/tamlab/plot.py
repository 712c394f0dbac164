"""Plotting task embeddings.

Scatter plots of projected path-finding task embeddings, coloured by the
end cell of every task.
"""
import matplotlib.pyplot as plt
import pandas as pd


def show_task_embeddings(coords, path=None, show=False):
    """Show projected embeddings in two panels, coloured by end row and
    end column.

    Args:
        coords (:class:`pandas.DataFrame` or str): Columns task, end_row,
            end_col, pc1, pc2, or the CSV written by ``viz-embeddings``.
        path (str): Save the figure there.
        show (bool): Call ``plt.show()``.
    Returns:
        class pandas.DataFrame
    """
    if isinstance(coords, str):
        coords = pd.read_csv(coords)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.5), sharex=True,
                             sharey=True)
    for axis, column, title in zip(axes, ('end_row', 'end_col'),
                                   ('end row', 'end column')):
        points = axis.scatter(coords['pc1'], coords['pc2'], c=coords[column],
                              cmap='viridis', s=18)
        axis.set_title('colour: %s' % title)
        axis.set_xlabel('PC 1')
        fig.colorbar(points, ax=axis)
    axes[0].set_ylabel('PC 2')
    fig.tight_layout()
    if path is not None:
        fig.savefig(path, dpi=120)
    if show:
        plt.show()
    plt.close(fig)
    return coords
